#include "cbfsl/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace cbfsl {

namespace {

constexpr const char* kCaveat =
    "caveat: the QP baseline is timed forward-only (no gradient computation), "
    "so speedups are a conservative floor relative to forward+backward "
    "differentiable QP layers";

using Clock = std::chrono::steady_clock;

/// Single-row QP over the composite constraint; the problem the closed form
/// solves, used by the correctness gate.
PolytopeQp composite_qp(const CompositeEval& ce, const ClassKLinear& alpha,
                        const ActionVec& nominal) {
    PolytopeQp qp;
    qp.a_matrix = ce.lie_g;
    qp.b_vector.resize(1);
    qp.b_vector(0) = -ce.lie_f - alpha(ce.value);
    qp.nominal = nominal;
    return qp;
}

}  // namespace

std::string to_string(BenchMethod m) {
    return m == BenchMethod::closed_form ? "closed_form" : "qp_baseline";
}

std::vector<BenchInstance> generate_instances(int count, int constraint_count,
                                              uint64_t seed) {
    if (count < 1)
        throw std::invalid_argument("generate_instances: need count >= 1");
    if (constraint_count < 1)
        throw std::invalid_argument("generate_instances: need I >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    std::uniform_real_distribution<double> radius(0.2, 0.6);

    std::vector<BenchInstance> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        BenchInstance inst;
        inst.set.barriers.resize(constraint_count);
        for (auto& b : inst.set.barriers) {
            b.center << coord(rng), coord(rng);
            b.radius = radius(rng);
        }
        for (;;) {
            StateVec x(2);
            x << coord(rng), coord(rng);
            bool outside = true;
            for (const auto& b : inst.set.barriers) {
                if (eval_barrier(b, x).value <= 0.0) {
                    outside = false;
                    break;
                }
            }
            if (outside) {
                inst.state = x;
                break;
            }
        }
        inst.nominal.resize(2);
        inst.nominal << coord(rng), coord(rng);
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<BenchRow> run_bench(const BenchSpec& spec) {
    if (spec.repetitions < 100)
        throw std::invalid_argument("bench: repetitions must be >= 100");
    if (spec.constraint_counts.empty())
        throw std::invalid_argument("bench: constraint_counts must be nonempty");
    if (spec.methods.empty())
        throw std::invalid_argument("bench: methods must be nonempty");
    const AffineSystem sys = single_integrator_2d();
    const ClassKLinear alpha{spec.alpha_gain};

    std::vector<BenchRow> rows;
    for (int I : spec.constraint_counts) {
        const std::vector<BenchInstance> instances =
            generate_instances(spec.repetitions, I, spec.seed + I);

        // Correctness gate on a prefix: closed form vs numerical QP on the
        // composite single-constraint problem, identical inputs.
        const int gate = std::min(1000, spec.repetitions);
        double max_gap = 0.0;
        for (int k = 0; k < gate; ++k) {
            const BenchInstance& inst = instances[k];
            const FilterOutput fo = filter_pipeline(
                inst.set, spec.kappa, sys, alpha, inst.state, inst.nominal);
            const QpSolution qs =
                solve_dual_ascent(composite_qp(fo.composite, alpha, inst.nominal));
            if (!qs.converged)
                throw std::runtime_error("bench gate: composite QP did not converge");
            max_gap = std::max(
                max_gap, (qs.solution - fo.result.safe_action).cwiseAbs().maxCoeff());
        }
        if (max_gap > 1e-6)
            throw std::runtime_error(
                "bench gate: closed form and QP disagree beyond 1e-6");

        for (BenchMethod method : spec.methods) {
            BenchRow row;
            row.method = method;
            row.constraint_count = I;
            row.correctness_max_gap = max_gap;

            volatile double sink = 0.0;  // keep the timed calls observable
            auto run_one = [&](const BenchInstance& inst) {
                if (method == BenchMethod::closed_form) {
                    const FilterOutput fo = filter_pipeline(
                        inst.set, spec.kappa, sys, alpha, inst.state, inst.nominal);
                    sink = fo.result.safe_action(0);
                } else {
                    const PolytopeQp qp =
                        build_cbf_qp(inst.set, inst.state, sys, alpha, inst.nominal);
                    const QpSolution qs = solve_dual_ascent(qp);
                    if (!qs.converged) ++row.failed_solves;
                    sink = qs.solution(0);
                }
            };

            const int warm = std::min(100, spec.repetitions);
            for (int k = 0; k < warm; ++k) run_one(instances[k]);

            // Welford running mean/variance over per-call times.
            double mean = 0.0, m2 = 0.0;
            long n = 0;
            for (const BenchInstance& inst : instances) {
                const auto t0 = Clock::now();
                run_one(inst);
                const auto t1 = Clock::now();
                const double dt =
                    std::chrono::duration<double>(t1 - t0).count();
                ++n;
                const double d = dt - mean;
                mean += d / n;
                m2 += d * (dt - mean);
            }
            row.atts_seconds = mean;
            row.stddev_seconds = n > 1 ? std::sqrt(m2 / (n - 1)) : 0.0;
            if (row.failed_solves > spec.repetitions / 100)
                throw std::runtime_error(
                    "bench: >1% of QP solves failed to converge, cell invalid");
            rows.push_back(row);
        }
    }
    return rows;
}

void emit_report(const std::vector<BenchRow>& rows, const std::string& csv_path,
                 std::string* summary) {
    if (rows.empty()) throw std::invalid_argument("emit_report: no rows");

    std::map<int, double> qp_atts;
    for (const auto& r : rows)
        if (r.method == BenchMethod::qp_baseline)
            qp_atts[r.constraint_count] = r.atts_seconds;

    std::ofstream f(csv_path);
    if (!f) throw std::runtime_error("cannot open " + csv_path + " for writing");
    f << "method,I,atts_mean_s,atts_std_s,speedup_vs_qp,correctness_max_gap\n";
    f.precision(12);
    std::ostringstream text;
    text << "average solving time per call (" << kCaveat << ")\n";
    for (const auto& r : rows) {
        const auto it = qp_atts.find(r.constraint_count);
        const double speedup =
            (it != qp_atts.end() && r.atts_seconds > 0.0)
                ? it->second / r.atts_seconds
                : 0.0;
        f << to_string(r.method) << ',' << r.constraint_count << ','
          << r.atts_seconds << ',' << r.stddev_seconds << ',' << speedup << ','
          << r.correctness_max_gap << '\n';
        text << "  " << to_string(r.method) << " I=" << r.constraint_count
             << ": " << r.atts_seconds * 1e6 << " us/call (sd "
             << r.stddev_seconds * 1e6 << ")";
        if (r.method != BenchMethod::qp_baseline && speedup > 0.0)
            text << ", speedup vs qp " << speedup << "x";
        if (r.failed_solves > 0)
            text << ", failed solves: " << r.failed_solves;
        text << '\n';
    }
    if (summary) *summary = text.str();
}

}  // namespace cbfsl
