#include "cbfsl/selfcheck.hpp"

#include <cmath>
#include <sstream>

#include "cbfsl/bench.hpp"

namespace cbfsl {

namespace {

CheckResult bound_sandwich_check(uint64_t seed) {
    CheckResult r{"bound-sandwich", true, ""};
    const BarrierSet set = default_env_config().obstacles;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 20000 && r.passed; ++k) {
        StateVec x(2);
        x << coord(rng), coord(rng);
        for (double kappa : {0.5, 2.0, 10.0}) {
            const BoundCheck bc = bound_check(set, kappa, x);
            worst = std::max(worst, std::max(bc.lower - bc.value,
                                             bc.value - bc.upper));
            if (bc.value < bc.lower - 1e-9 || bc.value > bc.upper + 1e-9)
                r.passed = false;
        }
    }
    std::ostringstream oss;
    oss << "worst bound violation " << worst;
    r.detail = oss.str();
    return r;
}

CheckResult closed_form_vs_qp_check(uint64_t seed) {
    CheckResult r{"closed-form-vs-qp", true, ""};
    const AffineSystem sys = single_integrator_2d();
    const ClassKLinear alpha{5.0};
    const double kappa = 2.0;
    const auto instances = generate_instances(2000, 3, seed);
    double max_gap = 0.0;
    for (const auto& inst : instances) {
        const FilterOutput fo =
            filter_pipeline(inst.set, kappa, sys, alpha, inst.state, inst.nominal);
        PolytopeQp qp;
        qp.a_matrix = fo.composite.lie_g;
        qp.b_vector.resize(1);
        qp.b_vector(0) = -fo.composite.lie_f - alpha(fo.composite.value);
        qp.nominal = inst.nominal;
        const QpSolution qs = solve_dual_ascent(qp);
        if (!qs.converged) {
            r.passed = false;
            r.detail = "QP solve did not converge";
            return r;
        }
        max_gap = std::max(
            max_gap, (qs.solution - fo.result.safe_action).cwiseAbs().maxCoeff());
    }
    r.passed = max_gap <= 1e-6;
    std::ostringstream oss;
    oss << "max per-component gap " << max_gap;
    r.detail = oss.str();
    return r;
}

CheckResult jacobian_check(uint64_t seed) {
    CheckResult r{"filter-jacobian", true, ""};
    const AffineSystem sys = single_integrator_2d();
    const ClassKLinear alpha{5.0};
    const double kappa = 2.0;
    const double fd_step = 1e-6;
    const auto instances = generate_instances(2000, 3, seed + 17);
    double worst = 0.0;
    int tested = 0;
    for (const auto& inst : instances) {
        if (tested >= 500) break;
        const FilterOutput fo =
            filter_pipeline(inst.set, kappa, sys, alpha, inst.state, inst.nominal);
        if (std::abs(fo.result.eta) <= 1e-3) continue;  // kink neighborhood
        ++tested;
        for (int c = 0; c < 2; ++c) {
            ActionVec up = inst.nominal, dn = inst.nominal;
            up(c) += fd_step;
            dn(c) -= fd_step;
            const ActionVec fd =
                (filter_pipeline(inst.set, kappa, sys, alpha, inst.state, up)
                     .result.safe_action -
                 filter_pipeline(inst.set, kappa, sys, alpha, inst.state, dn)
                     .result.safe_action) /
                (2.0 * fd_step);
            const double denom = std::max(1.0, fd.norm());
            worst = std::max(worst,
                             (fd - fo.jacobian.matrix.col(c)).norm() / denom);
        }
    }
    r.passed = worst <= 1e-5 && tested > 0;
    std::ostringstream oss;
    oss << "worst relative error " << worst << " over " << tested << " points";
    r.detail = oss.str();
    return r;
}

CheckResult mlp_gradient_check(uint64_t seed) {
    CheckResult r{"mlp-gradients", true, ""};
    std::mt19937_64 rng(seed + 99);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        Mlp net = mlp_init({3, 8, 5, 2}, rng);
        const Eigen::MatrixXd input = Eigen::MatrixXd::Random(3, 4);
        const Eigen::MatrixXd dout = Eigen::MatrixXd::Random(2, 4);
        MlpTape tape;
        mlp_forward(net, input, &tape);
        MlpGrads grads = mlp_zero_grads(net);
        mlp_backward(net, tape, dout, &grads);

        auto loss = [&] {
            return (mlp_forward(net, input).array() * dout.array()).sum();
        };
        const double fd_step = 1e-6;
        for (size_t l = 0; l < net.weights.size(); ++l) {
            for (int rr = 0; rr < net.weights[l].rows(); ++rr)
                for (int cc = 0; cc < net.weights[l].cols(); ++cc) {
                    const double orig = net.weights[l](rr, cc);
                    net.weights[l](rr, cc) = orig + fd_step;
                    const double up = loss();
                    net.weights[l](rr, cc) = orig - fd_step;
                    const double dn = loss();
                    net.weights[l](rr, cc) = orig;
                    const double fd = (up - dn) / (2.0 * fd_step);
                    const double denom = std::max(1.0, std::abs(fd));
                    worst = std::max(
                        worst, std::abs(fd - grads.weights[l](rr, cc)) / denom);
                }
        }
    }
    r.passed = worst <= 1e-4;
    std::ostringstream oss;
    oss << "worst relative error " << worst;
    r.detail = oss.str();
    return r;
}

}  // namespace

std::vector<CheckResult> run_self_checks(uint64_t seed) {
    return {
        bound_sandwich_check(seed),
        closed_form_vs_qp_check(seed),
        jacobian_check(seed),
        mlp_gradient_check(seed),
    };
}

}  // namespace cbfsl
