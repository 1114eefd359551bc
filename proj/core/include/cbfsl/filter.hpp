#pragma once

#include "cbfsl/barriers.hpp"

namespace cbfsl {

/// Linear extended class-K function alpha(h) = gain * h.
struct ClassKLinear {
    double gain = 5.0;

    double operator()(double h) const { return gain * h; }
};

struct FilterResult {
    ActionVec safe_action;
    double eta = 0.0;
    bool active = false;
    double constraint_slack = 0.0;  // L_f h + L_g h u_s + alpha(h)
};

/// Jacobian of the safe action with respect to the nominal action.
/// Identity when the filter is inactive; when active it is the orthogonal
/// projector I - g^T g / ||g||^2 with g = L_g h.
struct FilterJacobian {
    Eigen::MatrixXd matrix;
};

// L_g h is treated as zero when every component is below this magnitude.
inline constexpr double kLieGZeroTol = 1e-12;

double eta(double lie_f, const Eigen::RowVectorXd& lie_g, double h,
           const ActionVec& nominal, const ClassKLinear& alpha);

/// Minimal correction of the nominal action onto the half-space
/// L_f h + L_g h u >= -alpha(h):  u_s = nominal + max(0, eta) L_g h^T.
FilterResult safe_action(double lie_f, const Eigen::RowVectorXd& lie_g,
                         double h, const ActionVec& nominal,
                         const ClassKLinear& alpha);

FilterJacobian jacobian_wrt_nominal(const Eigen::RowVectorXd& lie_g,
                                    double eta_value);

struct FilterOutput {
    FilterResult result;
    FilterJacobian jacobian;
    CompositeEval composite;
};

/// Composite barrier evaluation followed by the closed-form correction and
/// its Jacobian, for one (state, nominal action) pair.
FilterOutput filter_pipeline(const BarrierSet& set, double kappa,
                             const AffineSystem& sys, const ClassKLinear& alpha,
                             const StateVec& x, const ActionVec& nominal);

}  // namespace cbfsl
