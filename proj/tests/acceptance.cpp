// Acceptance harness: runs every release criterion and prints one PASS/FAIL
// line per criterion. Exit code is the number of failed criteria.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "cbfsl/bench.hpp"
#include "cbfsl/config.hpp"
#include "cbfsl/learner.hpp"

using namespace cbfsl;

namespace {

int failures = 0;

void report(int criterion, bool passed, const std::string& detail) {
    std::printf("criterion %d [%s] %s\n", criterion, passed ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!passed) ++failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// --- criterion 1: smooth-minimum sandwich bounds -------------------------

void criterion_1() {
    const BarrierSet set = default_env_config().obstacles;
    const double log_gap_base = std::log(static_cast<double>(set.count()));
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 100000; ++k) {
        StateVec x(2);
        x << coord(rng), coord(rng);
        Eigen::VectorXd values(set.count());
        for (int i = 0; i < set.count(); ++i)
            values(i) = eval_barrier(set.barriers[i], x).value;
        const double min_hi = values.minCoeff();
        for (const double kappa : {0.5, 2.0, 10.0}) {
            const double h = composite_value(set, kappa, x);
            worst = std::max(worst, h - min_hi);                      // upper
            worst = std::max(worst, (min_hi - log_gap_base / kappa) - h);  // lower
        }
    }
    report(1, worst <= 1e-9,
           fmt("sandwich bounds on 1e5 states x 3 kappas, worst violation "
               "%.3e (tol 1e-9)",
               worst));
}

// --- criterion 2: closed form vs numerical QP ----------------------------

void criterion_2() {
    const AffineSystem sys = single_integrator_2d();
    const ClassKLinear alpha{5.0};
    const auto instances = generate_instances(10000, 3, 1002);
    double max_gap = 0.0, max_kkt = 0.0;
    for (const auto& inst : instances) {
        const FilterOutput fo =
            filter_pipeline(inst.set, 2.0, sys, alpha, inst.state, inst.nominal);
        PolytopeQp qp;
        qp.a_matrix = fo.composite.lie_g;
        qp.b_vector.resize(1);
        qp.b_vector(0) = -fo.composite.lie_f - alpha(fo.composite.value);
        qp.nominal = inst.nominal;
        const QpSolution qs = solve_dual_ascent(qp);
        if (!qs.converged) {
            report(2, false, "numerical QP failed to converge");
            return;
        }
        max_gap = std::max(
            max_gap, (qs.solution - fo.result.safe_action).cwiseAbs().maxCoeff());
        Eigen::VectorXd dual(1);
        dual << std::max(0.0, fo.result.eta);
        max_kkt = std::max(max_kkt,
                           kkt_residual(qp, fo.result.safe_action, dual));
    }
    report(2, max_gap <= 1e-6 && max_kkt <= 1e-8,
           fmt("1e4 instances: max closed-form/QP gap %.3e (tol 1e-6), max "
               "KKT residual %.3e (tol 1e-8)",
               max_gap, max_kkt));
}

// --- criterion 3: analytic filter Jacobian -------------------------------

void criterion_3() {
    const AffineSystem sys = single_integrator_2d();
    const ClassKLinear alpha{5.0};
    const double step = 1e-6;
    int tested = 0;
    double worst = 0.0;
    uint64_t seed = 1003;
    while (tested < 1000) {
        for (const auto& inst : generate_instances(2000, 3, seed++)) {
            const FilterOutput out = filter_pipeline(inst.set, 2.0, sys, alpha,
                                                     inst.state, inst.nominal);
            if (std::abs(out.result.eta) <= 1e-3) continue;
            for (int c = 0; c < 2; ++c) {
                ActionVec up = inst.nominal, dn = inst.nominal;
                up(c) += step;
                dn(c) -= step;
                const ActionVec fd =
                    (filter_pipeline(inst.set, 2.0, sys, alpha, inst.state, up)
                         .result.safe_action -
                     filter_pipeline(inst.set, 2.0, sys, alpha, inst.state, dn)
                         .result.safe_action) /
                    (2.0 * step);
                worst = std::max(worst,
                                 (fd - out.jacobian.matrix.col(c)).norm() /
                                     std::max(1.0, fd.norm()));
            }
            if (++tested >= 1000) break;
        }
    }
    report(3, worst <= 1e-5,
           fmt("1e3 points with |eta| > 1e-3: worst relative Jacobian error "
               "%.3e (tol 1e-5)",
               worst));
}

// --- criterion 4: end-to-end policy gradient -----------------------------

void criterion_4() {
    SacConfig cfg;
    cfg.hidden_sizes = {8};
    SacAgent agent(default_env_config(), cfg, FilterConfig{}, 1004);
    Eigen::MatrixXd states(2, 2);
    states << -0.2, 0.72, -0.2, 0.72;  // filter inactive / filter active
    std::mt19937_64 rng(1004);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd eps(2, 2);
    for (int c = 0; c < 2; ++c)
        for (int r = 0; r < 2; ++r) eps(r, c) = n01(rng);

    PolicyGrads grads{mlp_zero_grads(agent.policy().trunk),
                      mlp_zero_grads(agent.policy().mean_head),
                      mlp_zero_grads(agent.policy().log_std_head)};
    agent.policy_loss_and_grads(states, eps, &grads);

    const double step = 1e-5;
    double worst = 0.0;
    auto fd_net = [&](Mlp& net, const MlpGrads& analytic) {
        for (size_t l = 0; l < net.weights.size(); ++l) {
            auto probe = [&](double& param, double expected) {
                const double saved = param;
                param = saved + step;
                const double up = agent.policy_loss_and_grads(states, eps, nullptr);
                param = saved - step;
                const double dn = agent.policy_loss_and_grads(states, eps, nullptr);
                param = saved;
                const double fd = (up - dn) / (2.0 * step);
                worst = std::max(worst, std::abs(expected - fd) /
                                            std::max(1.0, std::abs(fd)));
            };
            for (int r = 0; r < net.weights[l].rows(); ++r)
                for (int c = 0; c < net.weights[l].cols(); ++c)
                    probe(net.weights[l](r, c), analytic.weights[l](r, c));
            for (int r = 0; r < net.biases[l].size(); ++r)
                probe(net.biases[l](r), analytic.biases[l](r));
        }
    };
    fd_net(agent.policy().trunk, grads.trunk);
    fd_net(agent.policy().mean_head, grads.mean_head);
    fd_net(agent.policy().log_std_head, grads.log_std_head);
    report(4, worst <= 1e-4,
           fmt("policy gradient vs finite differences over all parameters: "
               "worst relative error %.3e (tol 1e-4)",
               worst));
}

// --- criteria 5, 6, 8: training run shared across checks -----------------

void criteria_5_6_8() {
    const RunConfig run = default_run_config();
    SacAgent agent(run.env, run.sac, run.filter, run.seed);
    const TrainResult tr = agent.train(run.seed, /*record_traces=*/true);

    // 5: composite h > 0 at every step of every episode, start states included.
    double train_min_h = std::numeric_limits<double>::infinity();
    for (const auto& m : tr.metrics)
        train_min_h = std::min(train_min_h, m.min_composite_h);
    double trace_min_h = std::numeric_limits<double>::infinity();
    for (const auto& row : tr.traces)
        trace_min_h = std::min(trace_min_h, row.composite_h);
    report(5, train_min_h > 0.0 && trace_min_h > 0.0,
           fmt("1000 training episodes: min composite h %.4f over all steps "
               "(required > 0)",
               std::min(train_min_h, trace_min_h)));

    // 6: 200 evaluation episodes, no barrier ever negative, >= 90% goal rate.
    const EvalResult ev = evaluate(agent, 200, run.seed + 1, false);
    const double rate =
        static_cast<double>(ev.reached_goal) / static_cast<double>(ev.episodes);
    report(6, ev.min_hi >= 0.0 && rate >= 0.9,
           fmt("200 eval episodes: goal rate %.1f%% (required >= 90%%), min "
               "h_i %.4f (required >= 0)",
               100.0 * rate, ev.min_hi));

    // 8: learning signal over the same run.
    double first = 0.0, last = 0.0;
    const size_t n = tr.metrics.size();
    for (size_t e = 0; e < 100; ++e) first += tr.metrics[e].episode_return;
    for (size_t e = n - 100; e < n; ++e) last += tr.metrics[e].episode_return;
    first /= 100.0;
    last /= 100.0;
    report(8, last > first,
           fmt("mean return first 100 episodes %.2f vs last 100 episodes "
               "%.2f (required strictly greater)",
               first, last));
}

// --- criterion 7: timing ordering ----------------------------------------

void criterion_7() {
    BenchSpec spec;
    spec.seed = 1007;
    const auto rows = run_bench(spec);
    std::string summary;
    emit_report(rows, "acceptance_bench.csv", &summary);
    std::remove("acceptance_bench.csv");

    double closed3 = 0.0, closed30 = 0.0;
    bool ordering = true, ratio_ok = true;
    std::string ratios;
    for (int I : spec.constraint_counts) {
        double closed = 0.0, qp = 0.0;
        for (const auto& r : rows) {
            if (r.constraint_count != I) continue;
            (r.method == BenchMethod::closed_form ? closed : qp) = r.atts_seconds;
        }
        if (I == 3) closed3 = closed;
        if (I == 30) closed30 = closed;
        ordering = ordering && closed < qp;
        ratio_ok = ratio_ok && qp / closed >= 5.0;
        ratios += fmt(" I=%d %.2fx", I, qp / closed);
    }
    const bool scaling = closed30 <= 5.0 * closed3;
    const bool caveat = summary.find("forward-only") != std::string::npos;
    report(7, ordering && ratio_ok && scaling && caveat,
           fmt("closed form %s than QP at every I; speedups%s (required >= "
               "5x each); I=30/I=3 closed-form ratio %.2fx (required <= 5x); "
               "caveat %s",
               ordering ? "faster" : "NOT always faster", ratios.c_str(),
               closed30 / closed3, caveat ? "present" : "MISSING"));
}

// --- criterion 9: MLP gradient suite -------------------------------------

void criterion_9() {
    std::mt19937_64 rng(1009);
    std::uniform_int_distribution<int> width(2, 8);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<int> sizes{width(rng), width(rng), width(rng)};
        Mlp net = mlp_init(sizes, rng, trial % 2 == 0);
        const Eigen::MatrixXd x = Eigen::MatrixXd::Random(sizes.front(), 3);
        MlpTape tape;
        const Eigen::MatrixXd out = mlp_forward(net, x, &tape);
        MlpGrads grads = mlp_zero_grads(net);
        mlp_backward(net, tape, (2.0 * out).eval(), &grads);

        const double step = 1e-5;
        auto loss = [&] { return mlp_forward(net, x).squaredNorm(); };
        for (size_t l = 0; l < net.weights.size(); ++l) {
            auto probe = [&](double& param, double expected) {
                const double saved = param;
                param = saved + step;
                const double up = loss();
                param = saved - step;
                const double dn = loss();
                param = saved;
                const double fd = (up - dn) / (2.0 * step);
                worst = std::max(worst, std::abs(expected - fd) /
                                            std::max(1.0, std::abs(fd)));
            };
            for (int r = 0; r < net.weights[l].rows(); ++r)
                for (int c = 0; c < net.weights[l].cols(); ++c)
                    probe(net.weights[l](r, c), grads.weights[l](r, c));
            for (int r = 0; r < net.biases[l].size(); ++r)
                probe(net.biases[l](r), grads.biases[l](r));
        }
    }
    report(9, worst <= 1e-4,
           fmt("10 random networks: worst relative gradient error %.3e (tol "
               "1e-4)",
               worst));
}

}  // namespace

int main() {
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criteria_5_6_8();
        criterion_7();
        criterion_9();
    } catch (const std::exception& e) {
        std::printf("acceptance harness aborted: %s\n", e.what());
        return 1 + failures;
    }
    std::printf("%d of 9 criteria passed\n", 9 - failures);
    return failures;
}
