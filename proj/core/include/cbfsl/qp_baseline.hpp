#pragma once

#include "cbfsl/filter.hpp"

namespace cbfsl {

/// Dense instance of  min 1/2 ||u - nominal||^2  s.t.  A u >= b,
/// with row i built from barrier i's Lie derivatives.
struct PolytopeQp {
    Eigen::MatrixXd a_matrix;  // I x m
    Eigen::VectorXd b_vector;  // I
    Eigen::VectorXd nominal;   // m
};

struct QpSolution {
    Eigen::VectorXd solution;
    Eigen::VectorXd duals;
    double kkt_residual = 0.0;
    int iterations = 0;  // completed sweeps over the constraints
    bool converged = false;
};

struct SolverConfig {
    double tolerance = 1e-8;
    int max_iterations = 10000;
};

PolytopeQp build_cbf_qp(const BarrierSet& set, const StateVec& x,
                        const AffineSystem& sys, const ClassKLinear& alpha,
                        const ActionVec& nominal);

/// Hildreth-style cyclic dual coordinate ascent. The identity Hessian makes
/// each coordinate update closed-form: primal recovery u = nominal + A^T l,
/// projection onto l_i >= 0. Non-convergence is reported via the flag.
QpSolution solve_dual_ascent(const PolytopeQp& qp, const SolverConfig& cfg = {});

/// Max over stationarity inf-norm, primal violation, dual negativity and
/// complementarity magnitude.
double kkt_residual(const PolytopeQp& qp, const Eigen::VectorXd& candidate_u,
                    const Eigen::VectorXd& candidate_duals);

/// Dual objective -1/2 l^T A A^T l + l^T (b - A nominal); nondecreasing
/// across exact coordinate-ascent sweeps.
double dual_objective(const PolytopeQp& qp, const Eigen::VectorXd& duals);

}  // namespace cbfsl
