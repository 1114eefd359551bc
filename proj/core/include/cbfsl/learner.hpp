#pragma once

#include <optional>
#include <string>

#include "cbfsl/env.hpp"
#include "cbfsl/mlp.hpp"
#include "cbfsl/qp_baseline.hpp"

namespace cbfsl {

struct FilterConfig {
    double kappa = 2.0;
    double alpha_gain = 5.0;
};

struct SacConfig {
    double gamma = 0.99;
    double tau = 0.005;
    double entropy_alpha = 0.2;
    double learning_rate = 3e-4;
    int batch_size = 256;
    int episodes = 1000;
    int updates_per_step = 1;
    int warmup_steps = 1000;
    double action_scale = 3.0;
    std::vector<int> hidden_sizes{64, 64};
};

void validate_sac_config(const SacConfig& cfg);

/// Squashed-Gaussian policy: trunk with tanh hidden layers, linear mean and
/// log-std heads, log-std clamped to [-5, 2], action = scale * tanh(z).
struct PolicyNet {
    Mlp trunk;
    Mlp mean_head;
    Mlp log_std_head;
    double action_scale = 3.0;
};

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

struct PolicyGrads {
    MlpGrads trunk;
    MlpGrads mean_head;
    MlpGrads log_std_head;
};

/// Batched forward record; columns are batch samples.
struct PolicyForward {
    MlpTape trunk_tape, mean_tape, log_std_tape;
    Eigen::MatrixXd mu, log_std_raw, log_std, sigma, eps, z, tanh_z;
    Eigen::MatrixXd nominal;   // scale * tanh(z)
    Eigen::VectorXd log_prob;  // per sample, tanh change of variables included
};

PolicyNet policy_init(int state_dim, int action_dim, const SacConfig& cfg,
                      std::mt19937_64& rng);

PolicyForward policy_forward(const PolicyNet& policy,
                             const Eigen::MatrixXd& states,
                             const Eigen::MatrixXd& eps);

/// Reverse pass through both heads and the trunk. dl_dz is the total loss
/// gradient at the pre-squash sample z (the mean path); dl_dlog_std is the
/// explicit log-std gradient before the clamp mask, which is applied here.
void policy_backward(const PolicyNet& policy, const PolicyForward& fwd,
                     const Eigen::MatrixXd& dl_dz,
                     const Eigen::MatrixXd& dl_dlog_std, PolicyGrads* grads);

/// Single-state stochastic sample; returns the pre-filter action and its
/// log density under the squashed Gaussian.
std::pair<ActionVec, double> policy_sample(const PolicyNet& policy,
                                           const StateVec& x,
                                           std::mt19937_64& rng);

/// Deterministic action scale * tanh(mu), used at evaluation time.
ActionVec policy_mean_action(const PolicyNet& policy, const StateVec& x);

struct ReplayBuffer {
    explicit ReplayBuffer(int capacity = 100000);

    void push(Transition t);
    int size() const { return static_cast<int>(data_.size()); }
    int capacity() const { return capacity_; }
    const Transition& at(int i) const { return data_[i]; }
    std::vector<int> sample_indices(int batch, std::mt19937_64& rng) const;

  private:
    int capacity_;
    int next_ = 0;
    std::vector<Transition> data_;
};

struct EpisodeMetrics {
    int episode = 0;
    double episode_return = 0.0;
    int steps = 0;
    double min_hi = 0.0;
    double min_composite_h = 0.0;
    double policy_loss = 0.0;
    double critic_loss = 0.0;
};

struct TrainResult {
    std::vector<EpisodeMetrics> metrics;
    std::vector<TraceRow> traces;
};

/// Soft actor-critic with the closed-form safety filter as the final stage
/// of the policy. Single-threaded and deterministic given the seed.
class SacAgent {
  public:
    SacAgent(const EnvConfig& env_cfg, const SacConfig& sac_cfg,
             const FilterConfig& filter_cfg, uint64_t seed);

    /// Filters a nominal action at state x through the composite CBF layer.
    FilterOutput filter(const StateVec& x, const ActionVec& nominal) const;

    /// One gradient step on both critics; empty when the buffer has fewer
    /// than batch_size transitions.
    std::optional<double> critic_update(std::mt19937_64& rng);
    std::optional<double> policy_update(std::mt19937_64& rng);
    void soft_update();

    TrainResult train(uint64_t seed, bool record_traces = false);

    const SacConfig& sac_config() const { return sac_; }
    const FilterConfig& filter_config() const { return filter_; }
    const EnvConfig& env_config() const { return env_; }
    PolicyNet& policy() { return policy_; }
    const PolicyNet& policy() const { return policy_; }
    ReplayBuffer& buffer() { return buffer_; }

    std::string save_checkpoint() const;
    static SacAgent load_checkpoint(const std::string& text);

    /// Loss and full parameter gradient of the policy objective on an
    /// explicit batch with fixed noise; exposed for gradient verification.
    double policy_loss_and_grads(const Eigen::MatrixXd& states,
                                 const Eigen::MatrixXd& eps,
                                 PolicyGrads* grads) const;

  private:
    double critic_loss_and_grads(const std::vector<int>& idx,
                                 std::mt19937_64& rng, MlpGrads* g1,
                                 MlpGrads* g2);

    EnvConfig env_;
    SacConfig sac_;
    FilterConfig filter_;
    AffineSystem sys_;
    ClassKLinear alpha_;
    PolicyNet policy_;
    Mlp critic1_, critic2_, target1_, target2_;
    AdamOptimizer opt_trunk_, opt_mean_, opt_log_std_, opt_c1_, opt_c2_;
    ReplayBuffer buffer_;
};

void write_metrics_csv(const std::string& path,
                       const std::vector<EpisodeMetrics>& metrics);
void write_trace_csv(const std::string& path,
                     const std::vector<TraceRow>& traces);

/// 200-trial style rollout with the deterministic policy; per-episode RNG
/// streams are derived from the master seed by episode index.
struct EvalResult {
    int episodes = 0;
    int reached_goal = 0;
    double min_hi = 0.0;
    double min_composite_h = 0.0;
    std::vector<TraceRow> traces;
};

EvalResult evaluate(const SacAgent& agent, int episodes, uint64_t seed,
                    bool record_traces);

}  // namespace cbfsl
