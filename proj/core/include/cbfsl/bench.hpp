#pragma once

#include <string>
#include <vector>

#include "cbfsl/qp_baseline.hpp"

namespace cbfsl {

enum class BenchMethod { closed_form, qp_baseline };

std::string to_string(BenchMethod m);

struct BenchSpec {
    std::vector<int> constraint_counts{3, 10, 30};
    int repetitions = 10000;
    std::vector<BenchMethod> methods{BenchMethod::closed_form,
                                     BenchMethod::qp_baseline};
    uint64_t seed = 0;
    double kappa = 2.0;
    double alpha_gain = 5.0;
};

struct BenchRow {
    BenchMethod method = BenchMethod::closed_form;
    int constraint_count = 0;
    double atts_seconds = 0.0;
    double stddev_seconds = 0.0;
    double correctness_max_gap = 0.0;
    int failed_solves = 0;
};

struct BenchInstance {
    BarrierSet set;
    StateVec state;
    ActionVec nominal;
};

/// Random scene family: obstacle centers uniform in [-3,3]^2, radii in
/// [0.2,0.6], states rejection-sampled outside every obstacle, nominal
/// actions uniform in [-3,3]^2. Deterministic given the seed.
std::vector<BenchInstance> generate_instances(int count, int constraint_count,
                                              uint64_t seed);

/// Per-cell timing with a monotonic clock: 100-instance warmup, then each
/// call timed individually; both methods consume identical instance streams.
/// A correctness gate (closed form vs QP on the composite single constraint)
/// runs on a 1000-instance prefix before any timing.
std::vector<BenchRow> run_bench(const BenchSpec& spec);

/// CSV report plus a human-readable summary. The summary header carries the
/// timing-asymmetry caveat: the QP baseline is timed forward-only, so the
/// measured speedup is a conservative floor relative to forward+backward
/// differentiable layers.
void emit_report(const std::vector<BenchRow>& rows, const std::string& csv_path,
                 std::string* summary);

}  // namespace cbfsl
