#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cbfsl/bench.hpp"
#include "cbfsl/config.hpp"
#include "cbfsl/selfcheck.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_train(const std::string& config_path, std::optional<uint64_t> seed,
              std::optional<std::string> out_dir, bool traces) {
    cbfsl::RunConfig cfg = config_path.empty()
                               ? cbfsl::default_run_config()
                               : cbfsl::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output_dir = *out_dir;
    fs::create_directories(cfg.output_dir);

    cbfsl::SacAgent agent(cfg.env, cfg.sac, cfg.filter, cfg.seed);
    std::cout << "training: " << cfg.sac.episodes << " episodes, seed "
              << cfg.seed << "\n";
    const cbfsl::TrainResult result = agent.train(cfg.seed, traces);

    std::vector<std::string> artifacts;
    cbfsl::write_metrics_csv(cfg.output_dir + "/metrics.csv", result.metrics);
    artifacts.push_back("metrics.csv");
    {
        std::ofstream f(cfg.output_dir + "/checkpoint.json");
        f << agent.save_checkpoint() << '\n';
        artifacts.push_back("checkpoint.json");
    }
    if (traces) {
        cbfsl::write_trace_csv(cfg.output_dir + "/train_traces.csv",
                               result.traces);
        artifacts.push_back("train_traces.csv");
    }
    cbfsl::write_manifest(cfg, cfg.output_dir, artifacts);

    double min_h = std::numeric_limits<double>::infinity();
    double first = 0.0, last = 0.0;
    for (const auto& m : result.metrics)
        min_h = std::min(min_h, m.min_composite_h);
    const int n = static_cast<int>(result.metrics.size());
    const int w = std::min(100, n);
    for (int i = 0; i < w; ++i) first += result.metrics[i].episode_return / w;
    for (int i = n - w; i < n; ++i) last += result.metrics[i].episode_return / w;
    std::cout << "done: min composite h over training " << min_h
              << ", mean return first " << w << " episodes " << first
              << " -> last " << w << " episodes " << last << "\n"
              << "artifacts in " << cfg.output_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, int episodes, uint64_t seed,
             const std::string& out_dir, bool traces) {
    std::ifstream f(checkpoint_path);
    if (!f) {
        std::cerr << "error: cannot read checkpoint " << checkpoint_path << "\n";
        return 2;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    cbfsl::SacAgent agent = cbfsl::SacAgent::load_checkpoint(ss.str());

    const cbfsl::EvalResult result =
        cbfsl::evaluate(agent, episodes, seed, traces);
    std::cout << "eval: " << result.reached_goal << "/" << result.episodes
              << " episodes reached the goal, min h_i " << result.min_hi
              << ", min composite h " << result.min_composite_h << "\n";

    if (traces) {
        fs::create_directories(out_dir);
        cbfsl::write_trace_csv(out_dir + "/eval_traces.csv", result.traces);
        cbfsl::write_trajectory_svg(out_dir + "/trajectories.svg",
                                    agent.env_config(), result.traces);
        cbfsl::RunConfig cfg;
        cfg.env = agent.env_config();
        cfg.sac = agent.sac_config();
        cfg.filter = agent.filter_config();
        cfg.seed = seed;
        cfg.output_dir = out_dir;
        cbfsl::write_manifest(cfg, out_dir,
                              {"eval_traces.csv", "trajectories.svg"});
        std::cout << "traces in " << out_dir << "\n";
    }
    return 0;
}

int cmd_bench(const std::vector<int>& constraints, int reps,
              const std::string& out_csv, uint64_t seed) {
    cbfsl::BenchSpec spec;
    if (!constraints.empty()) spec.constraint_counts = constraints;
    spec.repetitions = reps;
    spec.seed = seed;
    const auto rows = cbfsl::run_bench(spec);
    std::string summary;
    cbfsl::emit_report(rows, out_csv, &summary);
    std::cout << summary << "report written to " << out_csv << "\n";
    return 0;
}

int cmd_check() {
    const auto results = cbfsl::run_self_checks();
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << " ("
                  << r.detail << ")\n";
        all = all && r.passed;
    }
    if (!all) std::cerr << "check: at least one property suite failed\n";
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Composite-CBF safety layer: training, evaluation and timing"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<uint64_t> train_seed;
    std::optional<std::string> train_out;
    bool train_traces = false;
    auto* train = app.add_subcommand("train", "train the safe SAC agent");
    train->add_option("--config", config_path, "run configuration (JSON)");
    train->add_option("--seed", train_seed, "override the config seed");
    train->add_option("--out", train_out, "override the output directory");
    train->add_flag("--traces", train_traces, "record per-step traces");

    std::string checkpoint_path;
    int eval_episodes = 200;
    uint64_t eval_seed = 1;
    std::string eval_out = "eval_out";
    bool eval_traces = false;
    auto* evalc = app.add_subcommand("eval", "roll out a trained checkpoint");
    evalc->add_option("--checkpoint", checkpoint_path, "checkpoint file")
        ->required();
    evalc->add_option("--episodes", eval_episodes, "number of episodes");
    evalc->add_option("--seed", eval_seed, "master seed for episode streams");
    evalc->add_option("--out", eval_out, "output directory for traces");
    evalc->add_flag("--traces", eval_traces, "export trace CSV and SVG");

    std::vector<int> bench_constraints;
    int bench_reps = 10000;
    std::string bench_out = "bench.csv";
    uint64_t bench_seed = 0;
    auto* bench = app.add_subcommand("bench", "time closed form vs QP baseline");
    bench->add_option("--constraints", bench_constraints,
                      "constraint counts (comma separated)")
        ->delimiter(',');
    bench->add_option("--reps", bench_reps, "instances per cell");
    bench->add_option("--out", bench_out, "CSV report path");
    bench->add_option("--seed", bench_seed, "instance-stream seed");

    app.add_subcommand("check", "run the property and oracle suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("train"))
            return cmd_train(config_path, train_seed, train_out, train_traces);
        if (app.got_subcommand("eval"))
            return cmd_eval(checkpoint_path, eval_episodes, eval_seed, eval_out,
                            eval_traces);
        if (app.got_subcommand("bench"))
            return cmd_bench(bench_constraints, bench_reps, bench_out,
                             bench_seed);
        if (app.got_subcommand("check")) return cmd_check();
    } catch (const cbfsl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
