#include "cbfsl/qp_baseline.hpp"

namespace cbfsl {

PolytopeQp build_cbf_qp(const BarrierSet& set, const StateVec& x,
                        const AffineSystem& sys, const ClassKLinear& alpha,
                        const ActionVec& nominal) {
    if (nominal.size() != sys.m)
        throw std::invalid_argument("build_cbf_qp: nominal action dimension mismatch");
    const int I = set.count();
    PolytopeQp qp;
    qp.a_matrix.resize(I, sys.m);
    qp.b_vector.resize(I);
    qp.nominal = nominal;

    const Eigen::VectorXd fx = eval_f(sys, x);
    const Eigen::MatrixXd gx = eval_g(sys, x);
    for (int i = 0; i < I; ++i) {
        const BarrierEval be = eval_barrier(set.barriers[i], x);
        qp.a_matrix.row(i) = be.gradient.transpose() * gx;
        qp.b_vector(i) = -be.gradient.dot(fx) - alpha(be.value);
    }
    return qp;
}

QpSolution solve_dual_ascent(const PolytopeQp& qp, const SolverConfig& cfg) {
    if (cfg.tolerance <= 0.0 || cfg.max_iterations < 1)
        throw std::invalid_argument("solve_dual_ascent: bad solver config");
    const int I = static_cast<int>(qp.a_matrix.rows());
    const int m = static_cast<int>(qp.a_matrix.cols());

    QpSolution sol;
    sol.duals = Eigen::VectorXd::Zero(I);
    sol.solution = qp.nominal;
    sol.kkt_residual = kkt_residual(qp, sol.solution, sol.duals);
    if (sol.kkt_residual <= cfg.tolerance) {
        sol.converged = true;
        sol.iterations = 1;
        return sol;
    }

    const Eigen::MatrixXd gram = qp.a_matrix * qp.a_matrix.transpose();
    const Eigen::VectorXd c = qp.b_vector - qp.a_matrix * qp.nominal;
    // Running primal iterate u = nominal + A^T l, updated incrementally.
    Eigen::VectorXd u = qp.nominal;

    for (int sweep = 1; sweep <= cfg.max_iterations; ++sweep) {
        for (int i = 0; i < I; ++i) {
            const double gii = gram(i, i);
            if (gii <= 0.0) continue;  // zero constraint row
            const double slack = qp.a_matrix.row(i).dot(u) - qp.b_vector(i);
            const double step =
                std::max(-sol.duals(i), -slack / gii) ;
            if (step != 0.0) {
                sol.duals(i) += step;
                u += step * qp.a_matrix.row(i).transpose();
            }
        }
        sol.iterations = sweep;
        // Recompute the primal from scratch to shed accumulated drift.
        sol.solution = qp.nominal + qp.a_matrix.transpose() * sol.duals;
        u = sol.solution;
        sol.kkt_residual = kkt_residual(qp, sol.solution, sol.duals);
        if (sol.kkt_residual <= cfg.tolerance) {
            sol.converged = true;
            break;
        }
    }
    (void)m;
    return sol;
}

double kkt_residual(const PolytopeQp& qp, const Eigen::VectorXd& candidate_u,
                    const Eigen::VectorXd& candidate_duals) {
    if (candidate_u.size() != qp.nominal.size() ||
        candidate_duals.size() != qp.a_matrix.rows())
        throw std::invalid_argument("kkt_residual: shape mismatch");
    const Eigen::VectorXd stationarity =
        candidate_u - qp.nominal - qp.a_matrix.transpose() * candidate_duals;
    const Eigen::VectorXd slack = qp.a_matrix * candidate_u - qp.b_vector;

    double res = stationarity.cwiseAbs().maxCoeff();
    for (int i = 0; i < slack.size(); ++i) {
        res = std::max(res, -slack(i));                          // primal feasibility
        res = std::max(res, -candidate_duals(i));                // dual feasibility
        res = std::max(res, std::abs(candidate_duals(i) * slack(i)));  // complementarity
    }
    return std::max(res, 0.0);
}

double dual_objective(const PolytopeQp& qp, const Eigen::VectorXd& duals) {
    const Eigen::VectorXd at_l = qp.a_matrix.transpose() * duals;
    return -0.5 * at_l.squaredNorm() +
           duals.dot(qp.b_vector - qp.a_matrix * qp.nominal);
}

}  // namespace cbfsl
