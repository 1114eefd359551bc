#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cbfsl/config.hpp"

using namespace cbfsl;

TEST_CASE("empty or whitespace config falls back to defaults") {
    for (const std::string text : {"", "   \n\t  "}) {
        const RunConfig cfg = parse_run_config(text);
        CHECK(cfg.seed == 0);
        CHECK(cfg.output_dir == "out");
        CHECK(cfg.env.obstacles.count() == 3);
        CHECK(cfg.sac.batch_size == 256);
        CHECK(cfg.filter.kappa == 2.0);
    }
}

TEST_CASE("partial overrides keep remaining defaults") {
    const RunConfig cfg = parse_run_config(R"({
        "seed": 7,
        "sac": {"episodes": 5, "hidden_sizes": [16]},
        "filter": {"kappa": 4.0}
    })");
    CHECK(cfg.seed == 7);
    CHECK(cfg.sac.episodes == 5);
    CHECK(cfg.sac.hidden_sizes == std::vector<int>{16});
    CHECK(cfg.sac.gamma == 0.99);       // untouched default
    CHECK(cfg.filter.kappa == 4.0);
    CHECK(cfg.filter.alpha_gain == 5.0);
    CHECK(cfg.env.dt == 0.02);
}

TEST_CASE("unknown keys are fatal and named") {
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"speed": 1})"),
                         doctest::Contains("speed"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"sac": {"gama": 0.9}})"),
                         doctest::Contains("sac.gama"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"env": {"goal": [1, 2]}})"),
                         doctest::Contains("env.goal"), ConfigError);
}

TEST_CASE("invalid values are named") {
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"filter": {"kappa": -1}})"),
                         doctest::Contains("filter.kappa"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"sac": {"tau": 2.0}})"),
                         doctest::Contains("sac.tau"), ConfigError);
    // dt * alpha_gain >= 1 breaks the discrete safety margin.
    CHECK_THROWS_WITH_AS(
        parse_run_config(R"({"env": {"dt": 0.3}, "filter": {"alpha_gain": 5}})"),
        doctest::Contains("env.dt"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"sac": {"batch_size": "many"}})"),
                    ConfigError);
}

TEST_CASE("obstacle overrides replace the default layout") {
    const RunConfig cfg = parse_run_config(R"({
        "env": {"obstacles": [{"center": [0.9, 0.9], "radius": 0.25}]}
    })");
    REQUIRE(cfg.env.obstacles.count() == 1);
    CHECK(cfg.env.obstacles.barriers[0].center.x() == 0.9);
    CHECK(cfg.env.obstacles.barriers[0].radius == 0.25);
    CHECK_THROWS_AS(
        parse_run_config(
            R"({"env": {"obstacles": [{"center": [0, 0], "radius": -1}]}})"),
        ConfigError);
}

TEST_CASE("json round trip is stable") {
    RunConfig cfg = default_run_config();
    cfg.seed = 13;
    cfg.sac.episodes = 42;
    cfg.filter.kappa = 3.5;
    const RunConfig back = parse_run_config(run_config_to_json(cfg));
    CHECK(back.seed == 13);
    CHECK(back.sac.episodes == 42);
    CHECK(back.filter.kappa == 3.5);
    CHECK(run_config_to_json(back) == run_config_to_json(cfg));
}

TEST_CASE("load_config reads a file and reports missing paths") {
    const std::string path = "config_test_tmp.json";
    {
        std::ofstream f(path);
        f << R"({"seed": 3})";
    }
    CHECK(load_config(path).seed == 3);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("fnv1a checksums") {
    // Reference digests for the 64-bit FNV-1a test vectors.
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
    CHECK(fnv1a_hex("x") != fnv1a_hex("y"));
}

TEST_CASE("manifest records the config and artifact checksums") {
    namespace fs = std::filesystem;
    const std::string dir = "manifest_test_tmp";
    fs::create_directories(dir);
    {
        std::ofstream f(dir + "/data.csv");
        f << "foobar";
    }
    RunConfig cfg = default_run_config();
    cfg.seed = 5;
    write_manifest(cfg, dir, {"data.csv"});

    std::ifstream f(dir + "/manifest.json");
    REQUIRE(f.good());
    const nlohmann::json j = nlohmann::json::parse(f);
    CHECK(j.at("seed") == 5);
    CHECK(j.at("artifacts").at("data.csv") == "85944171f73967e8");
    CHECK(j.at("config").at("sac").at("batch_size") == 256);

    CHECK_THROWS_AS(write_manifest(cfg, dir, {"missing.csv"}),
                    std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("trajectory svg contains the scene and one polyline per episode") {
    const EnvConfig env = default_env_config();
    std::vector<TraceRow> traces;
    for (int ep = 0; ep < 2; ++ep) {
        for (int s = 0; s < 4; ++s) {
            TraceRow r;
            r.episode = ep;
            r.step = s;
            r.position << 0.1 * s, 0.2 * s + ep;
            r.nominal = Eigen::VectorXd::Zero(2);
            r.safe = Eigen::VectorXd::Zero(2);
            traces.push_back(r);
        }
    }
    const std::string path = "svg_test_tmp.svg";
    write_trajectory_svg(path, env, traces);
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string svg = ss.str();
    auto count = [&](const std::string& needle) {
        int n = 0;
        for (size_t pos = svg.find(needle); pos != std::string::npos;
             pos = svg.find(needle, pos + 1))
            ++n;
        return n;
    };
    CHECK(count("class=\"obstacle\"") == env.obstacles.count());
    CHECK(count("class=\"goal\"") == 1);
    CHECK(count("class=\"trajectory\"") == 2);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(write_trajectory_svg(path, env, {}), std::runtime_error);
}
