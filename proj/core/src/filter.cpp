#include "cbfsl/filter.hpp"

namespace cbfsl {

namespace {

bool lie_g_is_zero(const Eigen::RowVectorXd& lie_g) {
    return lie_g.cwiseAbs().maxCoeff() <= kLieGZeroTol;
}

}  // namespace

double eta(double lie_f, const Eigen::RowVectorXd& lie_g, double h,
           const ActionVec& nominal, const ClassKLinear& alpha) {
    if (lie_g_is_zero(lie_g)) return 0.0;
    const double numerator = lie_f + lie_g.dot(nominal) + alpha(h);
    return -numerator / lie_g.squaredNorm();
}

FilterResult safe_action(double lie_f, const Eigen::RowVectorXd& lie_g,
                         double h, const ActionVec& nominal,
                         const ClassKLinear& alpha) {
    FilterResult out;
    out.eta = eta(lie_f, lie_g, h, nominal, alpha);
    out.active = out.eta > 0.0;
    out.safe_action = nominal;
    if (out.active) out.safe_action += out.eta * lie_g.transpose();
    out.constraint_slack = lie_f + lie_g.dot(out.safe_action) + alpha(h);
    return out;
}

FilterJacobian jacobian_wrt_nominal(const Eigen::RowVectorXd& lie_g,
                                    double eta_value) {
    const int m = static_cast<int>(lie_g.size());
    FilterJacobian out;
    out.matrix = Eigen::MatrixXd::Identity(m, m);
    // At the kink eta = 0 the inactive branch applies (hinge subgradient 0).
    if (eta_value <= 0.0 || lie_g_is_zero(lie_g)) return out;
    out.matrix -= lie_g.transpose() * lie_g / lie_g.squaredNorm();
    return out;
}

FilterOutput filter_pipeline(const BarrierSet& set, double kappa,
                             const AffineSystem& sys, const ClassKLinear& alpha,
                             const StateVec& x, const ActionVec& nominal) {
    if (nominal.size() != sys.m)
        throw std::invalid_argument("filter_pipeline: nominal action dimension mismatch");
    FilterOutput out;
    out.composite = composite_eval(set, kappa, x, sys);
    out.result = safe_action(out.composite.lie_f, out.composite.lie_g,
                             out.composite.value, nominal, alpha);
    out.jacobian = jacobian_wrt_nominal(out.composite.lie_g, out.result.eta);
    return out;
}

}  // namespace cbfsl
