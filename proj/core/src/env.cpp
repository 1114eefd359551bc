#include "cbfsl/env.hpp"

namespace cbfsl {

EnvConfig default_env_config() {
    EnvConfig cfg;
    cfg.obstacles.barriers = {
        {{1.0, 1.0}, 0.4},
        {{2.0, 0.5}, 0.3},
        {{1.5, 2.0}, 0.5},
    };
    return cfg;
}

void validate_env_config(const EnvConfig& cfg, double alpha_gain) {
    if (cfg.obstacles.count() < 1)
        throw std::invalid_argument("env.obstacles: need at least one obstacle");
    for (const auto& b : cfg.obstacles.barriers) {
        if (b.radius <= 0.0)
            throw std::invalid_argument("env.obstacles: radius must be positive");
        if (!b.center.allFinite())
            throw std::invalid_argument("env.obstacles: center must be finite");
    }
    if (cfg.goal_radius <= 0.0)
        throw std::invalid_argument("env.goal_radius: must be positive");
    if (cfg.dt <= 0.0)
        throw std::invalid_argument("env.dt: must be positive");
    if (cfg.max_steps < 1)
        throw std::invalid_argument("env.max_steps: must be positive");
    if (cfg.dt * alpha_gain >= 1.0)
        throw std::invalid_argument(
            "env.dt: dt * filter.alpha_gain must be < 1 (discrete safety margin)");
    if ((cfg.start_high - cfg.start_low).minCoeff() < 0.0)
        throw std::invalid_argument("env.start_box: low exceeds high");
    for (const auto& b : cfg.obstacles.barriers) {
        if ((cfg.goal_center - b.center).norm() <= b.radius + cfg.goal_radius)
            throw std::invalid_argument(
                "env.goal_center: goal region intersects an obstacle disk");
        // Closest point of the start box to the obstacle center.
        const Eigen::Vector2d closest =
            b.center.cwiseMax(cfg.start_low).cwiseMin(cfg.start_high);
        if ((closest - b.center).norm() <= b.radius)
            throw std::invalid_argument(
                "env.start_box: start box intersects an obstacle disk");
    }
}

double reward(const EnvConfig& cfg, const StateVec& state, const ActionVec& u,
              const StateVec& next_state, bool reached) {
    (void)state;
    const double dist = (next_state.head<2>() - cfg.goal_center).norm();
    return -cfg.reward_distance_weight * dist -
           cfg.reward_action_weight * u.squaredNorm() +
           (reached ? cfg.reward_goal_bonus : 0.0);
}

Environment::Environment(EnvConfig cfg, double kappa)
    : cfg_(std::move(cfg)), kappa_(kappa), sys_(single_integrator_2d()) {
    if (kappa_ <= 0.0)
        throw std::invalid_argument("kappa must be positive");
}

StateVec Environment::reset(uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> ux(cfg_.start_low.x(), cfg_.start_high.x());
    std::uniform_real_distribution<double> uy(cfg_.start_low.y(), cfg_.start_high.y());
    steps_taken_ = 0;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        StateVec x(2);
        x << ux(rng), uy(rng);
        bool safe = true;
        for (const auto& b : cfg_.obstacles.barriers) {
            if (eval_barrier(b, x).value <= 0.0) {
                safe = false;
                break;
            }
        }
        if (safe) return x;
    }
    throw std::runtime_error("env.reset: start box overlaps obstacles (1000 rejections)");
}

StepResult Environment::step(const StateVec& state, const ActionVec& safe_action,
                             int step_index) {
    if (step_index >= cfg_.max_steps)
        throw std::invalid_argument("env.step: step index past max_steps");
    StepResult out;
    out.next_state = step_euler(sys_, state, safe_action, cfg_.dt);
    out.reached_goal =
        (out.next_state.head<2>() - cfg_.goal_center).norm() <= cfg_.goal_radius;
    out.done = out.reached_goal || step_index + 1 >= cfg_.max_steps;
    out.reward = reward(cfg_, state, safe_action, out.next_state, out.reached_goal);

    double min_hi = std::numeric_limits<double>::infinity();
    for (const auto& b : cfg_.obstacles.barriers)
        min_hi = std::min(min_hi, eval_barrier(b, out.next_state).value);
    out.min_hi = min_hi;
    out.composite_h = composite_value(cfg_.obstacles, kappa_, out.next_state);
    steps_taken_ = step_index + 1;
    return out;
}

}  // namespace cbfsl
