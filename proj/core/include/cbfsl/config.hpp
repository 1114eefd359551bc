#pragma once

#include <map>
#include <string>

#include "cbfsl/learner.hpp"

namespace cbfsl {

/// Configuration problems map to CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    EnvConfig env;
    SacConfig sac;
    FilterConfig filter;
    uint64_t seed = 0;
    std::string output_dir = "out";
};

RunConfig default_run_config();

/// Parses a JSON run configuration. Missing keys take the documented
/// defaults; unknown keys are fatal and named in the error. An empty file
/// yields all defaults.
RunConfig parse_run_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::string run_config_to_json(const RunConfig& cfg);

/// FNV-1a 64-bit, hex-encoded; used for artifact checksums in manifests.
std::string fnv1a_hex(const std::string& data);

/// Writes manifest.json next to the run artifacts: config echo, seed, and a
/// checksum per artifact file (paths relative to the output dir).
void write_manifest(const RunConfig& cfg, const std::string& output_dir,
                    const std::vector<std::string>& artifact_files);

/// Obstacle disks, goal circle, and one polyline per episode.
void write_trajectory_svg(const std::string& path, const EnvConfig& env,
                          const std::vector<TraceRow>& traces);

}  // namespace cbfsl
