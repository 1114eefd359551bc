#include "cbfsl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cbfsl {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& section,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError("unknown key \"" +
                              (section.empty() ? key : section + "." + key) +
                              "\"");
    }
}

Eigen::Vector2d parse_vec2(const json& j, const std::string& name) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(name + ": expected an array of two numbers");
    return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(key + ": malformed value");
    }
}

}  // namespace

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.env = default_env_config();
    return cfg;
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg = default_run_config();

    std::string trimmed = text;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
    if (trimmed.empty()) return cfg;

    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    reject_unknown_keys(j, "", {"env", "sac", "filter", "seed", "output_dir"});
    cfg.seed = get_or<uint64_t>(j, "seed", cfg.seed);
    cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);

    if (j.contains("env")) {
        const json& e = j.at("env");
        reject_unknown_keys(e, "env",
                            {"obstacles", "goal_center", "goal_radius",
                             "start_low", "start_high", "dt", "max_steps",
                             "reward_distance_weight", "reward_goal_bonus",
                             "reward_action_weight"});
        if (e.contains("obstacles")) {
            cfg.env.obstacles.barriers.clear();
            for (const auto& ob : e.at("obstacles")) {
                reject_unknown_keys(ob, "env.obstacles", {"center", "radius"});
                CircularObstacleBarrier b;
                b.center = parse_vec2(ob.at("center"), "env.obstacles.center");
                b.radius = ob.at("radius").get<double>();
                if (b.radius <= 0.0)
                    throw ConfigError("env.obstacles.radius: must be positive");
                cfg.env.obstacles.barriers.push_back(b);
            }
        }
        if (e.contains("goal_center"))
            cfg.env.goal_center = parse_vec2(e.at("goal_center"), "env.goal_center");
        cfg.env.goal_radius = get_or(e, "goal_radius", cfg.env.goal_radius);
        if (e.contains("start_low"))
            cfg.env.start_low = parse_vec2(e.at("start_low"), "env.start_low");
        if (e.contains("start_high"))
            cfg.env.start_high = parse_vec2(e.at("start_high"), "env.start_high");
        cfg.env.dt = get_or(e, "dt", cfg.env.dt);
        cfg.env.max_steps = get_or(e, "max_steps", cfg.env.max_steps);
        cfg.env.reward_distance_weight =
            get_or(e, "reward_distance_weight", cfg.env.reward_distance_weight);
        cfg.env.reward_goal_bonus =
            get_or(e, "reward_goal_bonus", cfg.env.reward_goal_bonus);
        cfg.env.reward_action_weight =
            get_or(e, "reward_action_weight", cfg.env.reward_action_weight);
    }
    if (j.contains("sac")) {
        const json& s = j.at("sac");
        reject_unknown_keys(s, "sac",
                            {"gamma", "tau", "entropy_alpha", "learning_rate",
                             "batch_size", "episodes", "updates_per_step",
                             "warmup_steps", "action_scale", "hidden_sizes"});
        cfg.sac.gamma = get_or(s, "gamma", cfg.sac.gamma);
        cfg.sac.tau = get_or(s, "tau", cfg.sac.tau);
        cfg.sac.entropy_alpha = get_or(s, "entropy_alpha", cfg.sac.entropy_alpha);
        cfg.sac.learning_rate = get_or(s, "learning_rate", cfg.sac.learning_rate);
        cfg.sac.batch_size = get_or(s, "batch_size", cfg.sac.batch_size);
        cfg.sac.episodes = get_or(s, "episodes", cfg.sac.episodes);
        cfg.sac.updates_per_step =
            get_or(s, "updates_per_step", cfg.sac.updates_per_step);
        cfg.sac.warmup_steps = get_or(s, "warmup_steps", cfg.sac.warmup_steps);
        cfg.sac.action_scale = get_or(s, "action_scale", cfg.sac.action_scale);
        cfg.sac.hidden_sizes = get_or(s, "hidden_sizes", cfg.sac.hidden_sizes);
    }
    if (j.contains("filter")) {
        const json& f = j.at("filter");
        reject_unknown_keys(f, "filter", {"kappa", "alpha_gain"});
        cfg.filter.kappa = get_or(f, "kappa", cfg.filter.kappa);
        cfg.filter.alpha_gain = get_or(f, "alpha_gain", cfg.filter.alpha_gain);
    }

    if (cfg.filter.kappa <= 0.0)
        throw ConfigError("filter.kappa: must be positive");
    if (cfg.filter.alpha_gain <= 0.0)
        throw ConfigError("filter.alpha_gain: must be positive");
    try {
        validate_sac_config(cfg.sac);
        validate_env_config(cfg.env, cfg.filter.alpha_gain);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    json obstacles = json::array();
    for (const auto& b : cfg.env.obstacles.barriers)
        obstacles.push_back(
            {{"center", {b.center.x(), b.center.y()}}, {"radius", b.radius}});
    j["env"] = {{"obstacles", obstacles},
                {"goal_center", {cfg.env.goal_center.x(), cfg.env.goal_center.y()}},
                {"goal_radius", cfg.env.goal_radius},
                {"start_low", {cfg.env.start_low.x(), cfg.env.start_low.y()}},
                {"start_high", {cfg.env.start_high.x(), cfg.env.start_high.y()}},
                {"dt", cfg.env.dt},
                {"max_steps", cfg.env.max_steps},
                {"reward_distance_weight", cfg.env.reward_distance_weight},
                {"reward_goal_bonus", cfg.env.reward_goal_bonus},
                {"reward_action_weight", cfg.env.reward_action_weight}};
    j["sac"] = {{"gamma", cfg.sac.gamma},
                {"tau", cfg.sac.tau},
                {"entropy_alpha", cfg.sac.entropy_alpha},
                {"learning_rate", cfg.sac.learning_rate},
                {"batch_size", cfg.sac.batch_size},
                {"episodes", cfg.sac.episodes},
                {"updates_per_step", cfg.sac.updates_per_step},
                {"warmup_steps", cfg.sac.warmup_steps},
                {"action_scale", cfg.sac.action_scale},
                {"hidden_sizes", cfg.sac.hidden_sizes}};
    j["filter"] = {{"kappa", cfg.filter.kappa},
                   {"alpha_gain", cfg.filter.alpha_gain}};
    return j.dump(2);
}

std::string fnv1a_hex(const std::string& data) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream oss;
    oss << std::hex << h;
    return oss.str();
}

void write_manifest(const RunConfig& cfg, const std::string& output_dir,
                    const std::vector<std::string>& artifact_files) {
    json j;
    j["config"] = json::parse(run_config_to_json(cfg));
    j["seed"] = cfg.seed;
    json checksums = json::object();
    for (const auto& name : artifact_files) {
        std::ifstream f(output_dir + "/" + name, std::ios::binary);
        if (!f) throw std::runtime_error("manifest: missing artifact " + name);
        std::stringstream ss;
        ss << f.rdbuf();
        checksums[name] = fnv1a_hex(ss.str());
    }
    j["artifacts"] = checksums;
    std::ofstream out(output_dir + "/manifest.json");
    if (!out) throw std::runtime_error("manifest: cannot write to " + output_dir);
    out << j.dump(2) << '\n';
}

void write_trajectory_svg(const std::string& path, const EnvConfig& env,
                          const std::vector<TraceRow>& traces) {
    if (traces.empty())
        throw std::runtime_error("write_trajectory_svg: no traces recorded");

    double xmin = env.start_low.x(), xmax = env.goal_center.x();
    double ymin = env.start_low.y(), ymax = env.goal_center.y();
    for (const auto& b : env.obstacles.barriers) {
        xmin = std::min(xmin, b.center.x() - b.radius);
        xmax = std::max(xmax, b.center.x() + b.radius);
        ymin = std::min(ymin, b.center.y() - b.radius);
        ymax = std::max(ymax, b.center.y() + b.radius);
    }
    for (const auto& r : traces) {
        xmin = std::min(xmin, r.position.x());
        xmax = std::max(xmax, r.position.x());
        ymin = std::min(ymin, r.position.y());
        ymax = std::max(ymax, r.position.y());
    }
    const double pad = 0.5;
    xmin -= pad; ymin -= pad; xmax += pad; ymax += pad;
    const double scale = 600.0 / std::max(xmax - xmin, ymax - ymin);
    const double w = (xmax - xmin) * scale;
    const double h = (ymax - ymin) * scale;
    auto sx = [&](double x) { return (x - xmin) * scale; };
    auto sy = [&](double y) { return h - (y - ymin) * scale; };  // y up

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& b : env.obstacles.barriers) {
        f << "<circle cx=\"" << sx(b.center.x()) << "\" cy=\"" << sy(b.center.y())
          << "\" r=\"" << b.radius * scale
          << "\" fill=\"#9ecae1\" stroke=\"#3182bd\" class=\"obstacle\"/>\n";
    }
    f << "<circle cx=\"" << sx(env.goal_center.x()) << "\" cy=\""
      << sy(env.goal_center.y()) << "\" r=\"" << env.goal_radius * scale
      << "\" fill=\"none\" stroke=\"red\" stroke-width=\"2\" class=\"goal\"/>\n";

    int episode = traces.front().episode;
    std::ostringstream points;
    auto flush_polyline = [&](int ep) {
        const int hue = (ep * 47) % 360;
        f << "<polyline fill=\"none\" stroke=\"hsl(" << hue
          << ",70%,45%)\" stroke-width=\"1\" class=\"trajectory\" points=\""
          << points.str() << "\"/>\n";
        points.str("");
    };
    for (const auto& r : traces) {
        if (r.episode != episode) {
            flush_polyline(episode);
            episode = r.episode;
        }
        points << sx(r.position.x()) << ',' << sy(r.position.y()) << ' ';
    }
    flush_polyline(episode);
    f << "</svg>\n";
}

}  // namespace cbfsl
