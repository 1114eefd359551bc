#pragma once

#include <cstdint>
#include <random>

#include "cbfsl/filter.hpp"

namespace cbfsl {

/// Reachability task: a planar point mass must enter the goal disk while
/// staying outside every obstacle disk.
struct EnvConfig {
    BarrierSet obstacles;
    Eigen::Vector2d goal_center{3.0, 2.5};
    double goal_radius = 0.2;
    Eigen::Vector2d start_low{-0.3, -0.3};
    Eigen::Vector2d start_high{0.3, 0.3};
    double dt = 0.02;
    int max_steps = 200;
    double reward_distance_weight = 1.0;
    double reward_goal_bonus = 100.0;
    double reward_action_weight = 0.01;
};

/// Obstacle layout used by the experiments when no config file overrides it.
EnvConfig default_env_config();

/// Checks invariants: positive radii/dt, goal and start box clear of every
/// obstacle disk, and dt * alpha_gain < 1 for the given filter gain.
void validate_env_config(const EnvConfig& cfg, double alpha_gain);

struct StepResult {
    StateVec next_state;
    double reward = 0.0;
    bool done = false;
    bool reached_goal = false;
    double min_hi = 0.0;
    double composite_h = 0.0;
    double eta = 0.0;
};

struct Transition {
    StateVec state;
    ActionVec action;  // executed safe action
    double reward = 0.0;
    StateVec next_state;
    bool done = false;
};

/// One per-step trace record, written by the CSV exporter.
struct TraceRow {
    int episode = 0;
    int step = 0;
    Eigen::Vector2d position;
    ActionVec nominal;
    ActionVec safe;
    double eta = 0.0;
    Eigen::VectorXd barrier_values;  // h_1 .. h_I
    double composite_h = 0.0;
    double reward = 0.0;
    bool done = false;
};

double reward(const EnvConfig& cfg, const StateVec& state, const ActionVec& u,
              const StateVec& next_state, bool reached);

/// Mutable episode driver: reset + step with an internal step counter.
/// Instances are single-threaded; run one per worker.
class Environment {
  public:
    Environment(EnvConfig cfg, double kappa);

    /// Rejection-samples a start in the box with every h_i > 0.
    StateVec reset(uint64_t rng_seed);

    StepResult step(const StateVec& state, const ActionVec& safe_action,
                    int step_index);

    const EnvConfig& config() const { return cfg_; }
    double kappa() const { return kappa_; }
    int steps_taken() const { return steps_taken_; }

  private:
    EnvConfig cfg_;
    double kappa_;
    int steps_taken_ = 0;
    AffineSystem sys_;
};

}  // namespace cbfsl
