#include "cbfsl/learner.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cbfsl {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    // splitmix64 over seed + stream index; decorrelates per-episode streams.
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Eigen::MatrixXd standard_normal(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd out(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) out(r, c) = dist(rng);
    return out;
}

}  // namespace

void validate_sac_config(const SacConfig& cfg) {
    if (cfg.gamma <= 0.0 || cfg.gamma >= 1.0)
        throw std::invalid_argument("sac.gamma: must lie in (0, 1)");
    if (cfg.tau <= 0.0 || cfg.tau > 1.0)
        throw std::invalid_argument("sac.tau: must lie in (0, 1]");
    if (cfg.entropy_alpha < 0.0)
        throw std::invalid_argument("sac.entropy_alpha: must be nonnegative");
    if (cfg.learning_rate <= 0.0)
        throw std::invalid_argument("sac.learning_rate: must be positive");
    if (cfg.batch_size < 1)
        throw std::invalid_argument("sac.batch_size: must be positive");
    if (cfg.episodes < 1)
        throw std::invalid_argument("sac.episodes: must be positive");
    if (cfg.updates_per_step < 1)
        throw std::invalid_argument("sac.updates_per_step: must be positive");
    if (cfg.warmup_steps < 0)
        throw std::invalid_argument("sac.warmup_steps: must be nonnegative");
    if (cfg.action_scale <= 0.0)
        throw std::invalid_argument("sac.action_scale: must be positive");
    if (cfg.hidden_sizes.empty())
        throw std::invalid_argument("sac.hidden_sizes: must be nonempty");
}

PolicyNet policy_init(int state_dim, int action_dim, const SacConfig& cfg,
                      std::mt19937_64& rng) {
    PolicyNet p;
    std::vector<int> trunk_sizes{state_dim};
    trunk_sizes.insert(trunk_sizes.end(), cfg.hidden_sizes.begin(),
                       cfg.hidden_sizes.end());
    p.trunk = mlp_init(trunk_sizes, rng, /*output_tanh=*/true);
    p.mean_head = mlp_init({cfg.hidden_sizes.back(), action_dim}, rng);
    p.log_std_head = mlp_init({cfg.hidden_sizes.back(), action_dim}, rng);
    p.action_scale = cfg.action_scale;
    return p;
}

PolicyForward policy_forward(const PolicyNet& policy,
                             const Eigen::MatrixXd& states,
                             const Eigen::MatrixXd& eps) {
    PolicyForward f;
    const Eigen::MatrixXd trunk_out =
        mlp_forward(policy.trunk, states, &f.trunk_tape);
    f.mu = mlp_forward(policy.mean_head, trunk_out, &f.mean_tape);
    f.log_std_raw = mlp_forward(policy.log_std_head, trunk_out, &f.log_std_tape);
    f.log_std = f.log_std_raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
    f.sigma = f.log_std.array().exp().matrix();
    f.eps = eps;
    f.z = f.mu + f.sigma.cwiseProduct(eps);
    f.tanh_z = f.z.array().tanh().matrix();
    f.nominal = policy.action_scale * f.tanh_z;

    const Eigen::ArrayXXd gauss =
        -0.5 * eps.array().square() - f.log_std.array() - kHalfLog2Pi;
    const Eigen::ArrayXXd squash_corr =
        (policy.action_scale * (1.0 - f.tanh_z.array().square()) + 1e-12).log();
    f.log_prob = (gauss - squash_corr).colwise().sum().transpose();
    return f;
}

void policy_backward(const PolicyNet& policy, const PolicyForward& fwd,
                     const Eigen::MatrixXd& dl_dz,
                     const Eigen::MatrixXd& dl_dlog_std, PolicyGrads* grads) {
    // z = mu + sigma * eps, so the mean path takes dl_dz directly and the
    // log-std head takes dl_dz * sigma * eps plus the explicit term.
    const Eigen::MatrixXd dl_dmu = dl_dz;
    Eigen::MatrixXd dl_dls =
        dl_dz.cwiseProduct(fwd.sigma.cwiseProduct(fwd.eps)) + dl_dlog_std;
    // Clamp: zero gradient where the raw log-std was clipped.
    dl_dls = (dl_dls.array() *
              ((fwd.log_std_raw.array() > kLogStdMin) &&
               (fwd.log_std_raw.array() < kLogStdMax))
                  .cast<double>())
                 .matrix();

    Eigen::MatrixXd d_trunk =
        mlp_backward(policy.mean_head, fwd.mean_tape, dl_dmu,
                     grads ? &grads->mean_head : nullptr);
    d_trunk += mlp_backward(policy.log_std_head, fwd.log_std_tape, dl_dls,
                            grads ? &grads->log_std_head : nullptr);
    mlp_backward(policy.trunk, fwd.trunk_tape, d_trunk,
                 grads ? &grads->trunk : nullptr);
}

std::pair<ActionVec, double> policy_sample(const PolicyNet& policy,
                                           const StateVec& x,
                                           std::mt19937_64& rng) {
    const int m = policy.mean_head.output_size();
    const Eigen::MatrixXd eps = standard_normal(m, 1, rng);
    const PolicyForward f = policy_forward(policy, x, eps);
    return {f.nominal.col(0), f.log_prob(0)};
}

ActionVec policy_mean_action(const PolicyNet& policy, const StateVec& x) {
    const Eigen::MatrixXd trunk_out = mlp_forward(policy.trunk, x);
    const Eigen::MatrixXd mu = mlp_forward(policy.mean_head, trunk_out);
    return policy.action_scale * mu.array().tanh().matrix();
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1)
        throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    data_.reserve(std::min(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
    if (size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<int> ReplayBuffer::sample_indices(int batch,
                                              std::mt19937_64& rng) const {
    if (size() < batch)
        throw std::logic_error("ReplayBuffer: not enough transitions to sample");
    std::uniform_int_distribution<int> dist(0, size() - 1);
    std::vector<int> idx(batch);
    for (int& i : idx) i = dist(rng);
    return idx;
}

SacAgent::SacAgent(const EnvConfig& env_cfg, const SacConfig& sac_cfg,
                   const FilterConfig& filter_cfg, uint64_t seed)
    : env_(env_cfg),
      sac_(sac_cfg),
      filter_(filter_cfg),
      sys_(single_integrator_2d()),
      alpha_{filter_cfg.alpha_gain},
      policy_([&] {
          validate_sac_config(sac_cfg);
          if (filter_cfg.kappa <= 0.0)
              throw std::invalid_argument("filter.kappa: must be positive");
          if (filter_cfg.alpha_gain <= 0.0)
              throw std::invalid_argument("filter.alpha_gain: must be positive");
          validate_env_config(env_cfg, filter_cfg.alpha_gain);
          std::mt19937_64 rng(mix_seed(seed, 0));
          return policy_init(2, 2, sac_cfg, rng);
      }()),
      critic1_([&] {
          std::mt19937_64 rng(mix_seed(seed, 1));
          std::vector<int> sizes{4};
          sizes.insert(sizes.end(), sac_cfg.hidden_sizes.begin(),
                       sac_cfg.hidden_sizes.end());
          sizes.push_back(1);
          return mlp_init(sizes, rng);
      }()),
      critic2_([&] {
          std::mt19937_64 rng(mix_seed(seed, 2));
          std::vector<int> sizes{4};
          sizes.insert(sizes.end(), sac_cfg.hidden_sizes.begin(),
                       sac_cfg.hidden_sizes.end());
          sizes.push_back(1);
          return mlp_init(sizes, rng);
      }()),
      target1_(critic1_),
      target2_(critic2_),
      opt_trunk_(policy_.trunk, sac_cfg.learning_rate),
      opt_mean_(policy_.mean_head, sac_cfg.learning_rate),
      opt_log_std_(policy_.log_std_head, sac_cfg.learning_rate),
      opt_c1_(critic1_, sac_cfg.learning_rate),
      opt_c2_(critic2_, sac_cfg.learning_rate),
      buffer_(100000) {}

FilterOutput SacAgent::filter(const StateVec& x, const ActionVec& nominal) const {
    return filter_pipeline(env_.obstacles, filter_.kappa, sys_, alpha_, x,
                           nominal);
}

double SacAgent::critic_loss_and_grads(const std::vector<int>& idx,
                                       std::mt19937_64& rng, MlpGrads* g1,
                                       MlpGrads* g2) {
    const int B = static_cast<int>(idx.size());
    Eigen::MatrixXd X(2, B), U(2, B), Xn(2, B);
    Eigen::VectorXd R(B), notdone(B);
    for (int j = 0; j < B; ++j) {
        const Transition& t = buffer_.at(idx[j]);
        X.col(j) = t.state;
        U.col(j) = t.action;
        Xn.col(j) = t.next_state;
        R(j) = t.reward;
        notdone(j) = t.done ? 0.0 : 1.0;
    }

    // Next action through the full policy-plus-filter pipeline.
    const Eigen::MatrixXd eps = standard_normal(2, B, rng);
    const PolicyForward fnext = policy_forward(policy_, Xn, eps);
    Eigen::MatrixXd Un(2, B);
    for (int j = 0; j < B; ++j)
        Un.col(j) = filter(Xn.col(j), fnext.nominal.col(j)).result.safe_action;

    Eigen::MatrixXd qin(4, B);
    qin << Xn, Un;
    const Eigen::VectorXd q1n = mlp_forward(target1_, qin).transpose();
    const Eigen::VectorXd q2n = mlp_forward(target2_, qin).transpose();
    const Eigen::VectorXd v =
        q1n.cwiseMin(q2n) - sac_.entropy_alpha * fnext.log_prob;
    const Eigen::VectorXd y =
        R + sac_.gamma * notdone.cwiseProduct(v);

    Eigen::MatrixXd qin0(4, B);
    qin0 << X, U;
    MlpTape tape1, tape2;
    const Eigen::VectorXd q1 =
        mlp_forward(critic1_, qin0, &tape1).transpose();
    const Eigen::VectorXd q2 =
        mlp_forward(critic2_, qin0, &tape2).transpose();

    const Eigen::VectorXd d1 = q1 - y;
    const Eigen::VectorXd d2 = q2 - y;
    const double loss =
        0.5 * (d1.squaredNorm() + d2.squaredNorm()) / static_cast<double>(B);
    if (g1) mlp_backward(critic1_, tape1, d1.transpose() / B, g1);
    if (g2) mlp_backward(critic2_, tape2, d2.transpose() / B, g2);
    return loss;
}

std::optional<double> SacAgent::critic_update(std::mt19937_64& rng) {
    if (buffer_.size() < sac_.batch_size) return std::nullopt;
    const std::vector<int> idx = buffer_.sample_indices(sac_.batch_size, rng);
    MlpGrads g1 = mlp_zero_grads(critic1_);
    MlpGrads g2 = mlp_zero_grads(critic2_);
    const double loss = critic_loss_and_grads(idx, rng, &g1, &g2);
    opt_c1_.step(critic1_, g1);
    opt_c2_.step(critic2_, g2);
    return loss;
}

double SacAgent::policy_loss_and_grads(const Eigen::MatrixXd& states,
                                       const Eigen::MatrixXd& eps,
                                       PolicyGrads* grads) const {
    const int B = static_cast<int>(states.cols());
    const PolicyForward f = policy_forward(policy_, states, eps);

    std::vector<FilterJacobian> jacs(B);
    Eigen::MatrixXd Us(2, B);
    for (int j = 0; j < B; ++j) {
        FilterOutput out = filter(states.col(j), f.nominal.col(j));
        Us.col(j) = out.result.safe_action;
        jacs[j] = std::move(out.jacobian);
    }

    Eigen::MatrixXd qin(4, B);
    qin << states, Us;
    MlpTape tape1, tape2;
    const Eigen::VectorXd q1 = mlp_forward(critic1_, qin, &tape1).transpose();
    const Eigen::VectorXd q2 = mlp_forward(critic2_, qin, &tape2).transpose();
    const Eigen::VectorXd qmin = q1.cwiseMin(q2);

    const double loss =
        (sac_.entropy_alpha * f.log_prob - qmin).mean();
    if (!grads) return loss;

    // d loss / d q for whichever critic attains the min, per sample.
    Eigen::MatrixXd dq1 = Eigen::MatrixXd::Zero(1, B);
    Eigen::MatrixXd dq2 = Eigen::MatrixXd::Zero(1, B);
    for (int j = 0; j < B; ++j)
        (q1(j) <= q2(j) ? dq1 : dq2)(0, j) = -1.0 / B;
    const Eigen::MatrixXd din1 = mlp_backward(critic1_, tape1, dq1, nullptr);
    const Eigen::MatrixXd din2 = mlp_backward(critic2_, tape2, dq2, nullptr);
    Eigen::MatrixXd dl_dus = din1.bottomRows(2) + din2.bottomRows(2);

    // Through the safety layer's analytic Jacobian into the nominal action.
    Eigen::MatrixXd dl_dnom(2, B);
    for (int j = 0; j < B; ++j)
        dl_dnom.col(j) = jacs[j].matrix.transpose() * dl_dus.col(j);

    // Through the tanh squashing, plus the log-prob dependence on z.
    const Eigen::ArrayXXd dsquash =
        policy_.action_scale * (1.0 - f.tanh_z.array().square());
    Eigen::MatrixXd dl_dz =
        (dl_dnom.array() * dsquash +
         (sac_.entropy_alpha / B) * 2.0 * f.tanh_z.array())
            .matrix();
    const Eigen::MatrixXd dl_dlog_std = Eigen::MatrixXd::Constant(
        2, B, -sac_.entropy_alpha / static_cast<double>(B));

    policy_backward(policy_, f, dl_dz, dl_dlog_std, grads);
    return loss;
}

std::optional<double> SacAgent::policy_update(std::mt19937_64& rng) {
    if (buffer_.size() < sac_.batch_size) return std::nullopt;
    const std::vector<int> idx = buffer_.sample_indices(sac_.batch_size, rng);
    const int B = sac_.batch_size;
    Eigen::MatrixXd X(2, B);
    for (int j = 0; j < B; ++j) X.col(j) = buffer_.at(idx[j]).state;
    const Eigen::MatrixXd eps = standard_normal(2, B, rng);

    PolicyGrads grads{mlp_zero_grads(policy_.trunk),
                      mlp_zero_grads(policy_.mean_head),
                      mlp_zero_grads(policy_.log_std_head)};
    const double loss = policy_loss_and_grads(X, eps, &grads);
    opt_trunk_.step(policy_.trunk, grads.trunk);
    opt_mean_.step(policy_.mean_head, grads.mean_head);
    opt_log_std_.step(policy_.log_std_head, grads.log_std_head);
    return loss;
}

void SacAgent::soft_update() {
    for (auto [online, target] :
         {std::pair{&critic1_, &target1_}, std::pair{&critic2_, &target2_}}) {
        for (size_t l = 0; l < online->weights.size(); ++l) {
            target->weights[l] = sac_.tau * online->weights[l] +
                                 (1.0 - sac_.tau) * target->weights[l];
            target->biases[l] = sac_.tau * online->biases[l] +
                                (1.0 - sac_.tau) * target->biases[l];
        }
    }
}

TrainResult SacAgent::train(uint64_t seed, bool record_traces) {
    Environment env(env_, filter_.kappa);
    std::mt19937_64 rng(mix_seed(seed, 0xA11CE));
    std::uniform_real_distribution<double> warmup_action(-sac_.action_scale,
                                                         sac_.action_scale);
    TrainResult out;
    long total_steps = 0;

    for (int episode = 1; episode <= sac_.episodes; ++episode) {
        StateVec x = env.reset(mix_seed(seed, static_cast<uint64_t>(episode)));
        EpisodeMetrics m;
        m.episode = episode;
        m.min_hi = std::numeric_limits<double>::infinity();
        m.min_composite_h = m.min_hi;
        // Include the start state in the episode's safety minima.
        {
            double mh = std::numeric_limits<double>::infinity();
            for (const auto& b : env_.obstacles.barriers)
                mh = std::min(mh, eval_barrier(b, x).value);
            m.min_hi = mh;
            m.min_composite_h = composite_value(env_.obstacles, filter_.kappa, x);
        }

        for (int step = 0; step < env_.max_steps; ++step) {
            ActionVec nominal(2);
            if (total_steps < sac_.warmup_steps) {
                nominal << warmup_action(rng), warmup_action(rng);
            } else {
                nominal = policy_sample(policy_, x, rng).first;
            }
            const FilterOutput filt = filter(x, nominal);
            StepResult sr = env.step(x, filt.result.safe_action, step);
            sr.eta = filt.result.eta;

            buffer_.push({x, filt.result.safe_action, sr.reward, sr.next_state,
                          sr.done});
            m.episode_return += sr.reward;
            m.min_hi = std::min(m.min_hi, sr.min_hi);
            m.min_composite_h = std::min(m.min_composite_h, sr.composite_h);
            m.steps = step + 1;

            if (record_traces) {
                TraceRow row;
                row.episode = episode;
                row.step = step;
                row.position = x.head<2>();
                row.nominal = nominal;
                row.safe = filt.result.safe_action;
                row.eta = filt.result.eta;
                row.barrier_values.resize(env_.obstacles.count());
                for (int i = 0; i < env_.obstacles.count(); ++i)
                    row.barrier_values(i) =
                        eval_barrier(env_.obstacles.barriers[i], sr.next_state)
                            .value;
                row.composite_h = sr.composite_h;
                row.reward = sr.reward;
                row.done = sr.done;
                out.traces.push_back(std::move(row));
            }

            ++total_steps;
            if (total_steps >= sac_.warmup_steps &&
                buffer_.size() >= sac_.batch_size) {
                for (int k = 0; k < sac_.updates_per_step; ++k) {
                    const auto closs = critic_update(rng);
                    const auto ploss = policy_update(rng);
                    soft_update();
                    if (closs) m.critic_loss = *closs;
                    if (ploss) m.policy_loss = *ploss;
                    if ((closs && !std::isfinite(*closs)) ||
                        (ploss && !std::isfinite(*ploss))) {
                        std::ostringstream oss;
                        oss << "train: non-finite loss at episode " << episode
                            << " step " << step << " (critic="
                            << (closs ? *closs : 0.0) << ", policy="
                            << (ploss ? *ploss : 0.0) << ", state=["
                            << x.transpose() << "])";
                        throw std::runtime_error(oss.str());
                    }
                }
            }

            x = sr.next_state;
            if (sr.done) break;
        }
        out.metrics.push_back(m);
    }
    return out;
}

EvalResult evaluate(const SacAgent& agent, int episodes, uint64_t seed,
                    bool record_traces) {
    const EnvConfig& cfg = agent.env_config();
    EvalResult out;
    out.episodes = episodes;
    out.min_hi = std::numeric_limits<double>::infinity();
    out.min_composite_h = out.min_hi;

    for (int e = 0; e < episodes; ++e) {
        Environment env(cfg, agent.filter_config().kappa);
        StateVec x = env.reset(mix_seed(seed, static_cast<uint64_t>(e)));
        for (int step = 0; step < cfg.max_steps; ++step) {
            const ActionVec nominal = policy_mean_action(agent.policy(), x);
            const FilterOutput filt = agent.filter(x, nominal);
            const StepResult sr = env.step(x, filt.result.safe_action, step);
            out.min_hi = std::min(out.min_hi, sr.min_hi);
            out.min_composite_h = std::min(out.min_composite_h, sr.composite_h);
            if (record_traces) {
                TraceRow row;
                row.episode = e;
                row.step = step;
                row.position = x.head<2>();
                row.nominal = nominal;
                row.safe = filt.result.safe_action;
                row.eta = filt.result.eta;
                row.barrier_values.resize(cfg.obstacles.count());
                for (int i = 0; i < cfg.obstacles.count(); ++i)
                    row.barrier_values(i) =
                        eval_barrier(cfg.obstacles.barriers[i], sr.next_state)
                            .value;
                row.composite_h = sr.composite_h;
                row.reward = sr.reward;
                row.done = sr.done;
                out.traces.push_back(std::move(row));
            }
            x = sr.next_state;
            if (sr.reached_goal) {
                ++out.reached_goal;
                break;
            }
            if (sr.done) break;
        }
    }
    return out;
}

namespace {

nlohmann::json mlp_to_json(const Mlp& net) {
    nlohmann::json j;
    j["output_tanh"] = net.output_tanh;
    j["layers"] = nlohmann::json::array();
    for (size_t l = 0; l < net.weights.size(); ++l) {
        nlohmann::json layer;
        std::vector<std::vector<double>> w(net.weights[l].rows());
        for (int r = 0; r < net.weights[l].rows(); ++r) {
            w[r].assign(net.weights[l].row(r).begin(),
                        net.weights[l].row(r).end());
        }
        layer["weights"] = w;
        layer["biases"] =
            std::vector<double>(net.biases[l].begin(), net.biases[l].end());
        j["layers"].push_back(layer);
    }
    return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
    Mlp net;
    net.output_tanh = j.at("output_tanh").get<bool>();
    for (const auto& layer : j.at("layers")) {
        const auto w = layer.at("weights").get<std::vector<std::vector<double>>>();
        const auto b = layer.at("biases").get<std::vector<double>>();
        Eigen::MatrixXd wm(w.size(), w.empty() ? 0 : w.front().size());
        for (size_t r = 0; r < w.size(); ++r)
            for (size_t c = 0; c < w[r].size(); ++c) wm(r, c) = w[r][c];
        net.weights.push_back(std::move(wm));
        net.biases.push_back(
            Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()));
    }
    return net;
}

}  // namespace

std::string SacAgent::save_checkpoint() const {
    nlohmann::json j;
    j["version"] = "cbf-safelayer-ckpt-1";
    nlohmann::json env;
    env["obstacles"] = nlohmann::json::array();
    for (const auto& b : env_.obstacles.barriers)
        env["obstacles"].push_back(
            {{"center", {b.center.x(), b.center.y()}}, {"radius", b.radius}});
    env["goal_center"] = {env_.goal_center.x(), env_.goal_center.y()};
    env["goal_radius"] = env_.goal_radius;
    env["start_low"] = {env_.start_low.x(), env_.start_low.y()};
    env["start_high"] = {env_.start_high.x(), env_.start_high.y()};
    env["dt"] = env_.dt;
    env["max_steps"] = env_.max_steps;
    env["reward_distance_weight"] = env_.reward_distance_weight;
    env["reward_goal_bonus"] = env_.reward_goal_bonus;
    env["reward_action_weight"] = env_.reward_action_weight;
    j["env"] = env;
    j["sac"] = {{"gamma", sac_.gamma},
                {"tau", sac_.tau},
                {"entropy_alpha", sac_.entropy_alpha},
                {"learning_rate", sac_.learning_rate},
                {"batch_size", sac_.batch_size},
                {"episodes", sac_.episodes},
                {"updates_per_step", sac_.updates_per_step},
                {"warmup_steps", sac_.warmup_steps},
                {"action_scale", sac_.action_scale},
                {"hidden_sizes", sac_.hidden_sizes}};
    j["filter"] = {{"kappa", filter_.kappa}, {"alpha_gain", filter_.alpha_gain}};
    j["policy"] = {{"trunk", mlp_to_json(policy_.trunk)},
                   {"mean_head", mlp_to_json(policy_.mean_head)},
                   {"log_std_head", mlp_to_json(policy_.log_std_head)},
                   {"action_scale", policy_.action_scale}};
    j["critic1"] = mlp_to_json(critic1_);
    j["critic2"] = mlp_to_json(critic2_);
    j["target1"] = mlp_to_json(target1_);
    j["target2"] = mlp_to_json(target2_);
    return j.dump(2);
}

SacAgent SacAgent::load_checkpoint(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("version").get<std::string>() != "cbf-safelayer-ckpt-1")
        throw std::runtime_error("checkpoint: unsupported version field");

    EnvConfig env;
    env.obstacles.barriers.clear();
    for (const auto& b : j.at("env").at("obstacles")) {
        CircularObstacleBarrier ob;
        ob.center << b.at("center")[0].get<double>(),
            b.at("center")[1].get<double>();
        ob.radius = b.at("radius").get<double>();
        env.obstacles.barriers.push_back(ob);
    }
    const auto& je = j.at("env");
    env.goal_center << je.at("goal_center")[0].get<double>(),
        je.at("goal_center")[1].get<double>();
    env.goal_radius = je.at("goal_radius").get<double>();
    env.start_low << je.at("start_low")[0].get<double>(),
        je.at("start_low")[1].get<double>();
    env.start_high << je.at("start_high")[0].get<double>(),
        je.at("start_high")[1].get<double>();
    env.dt = je.at("dt").get<double>();
    env.max_steps = je.at("max_steps").get<int>();
    env.reward_distance_weight = je.at("reward_distance_weight").get<double>();
    env.reward_goal_bonus = je.at("reward_goal_bonus").get<double>();
    env.reward_action_weight = je.at("reward_action_weight").get<double>();

    const auto& js = j.at("sac");
    SacConfig sac;
    sac.gamma = js.at("gamma").get<double>();
    sac.tau = js.at("tau").get<double>();
    sac.entropy_alpha = js.at("entropy_alpha").get<double>();
    sac.learning_rate = js.at("learning_rate").get<double>();
    sac.batch_size = js.at("batch_size").get<int>();
    sac.episodes = js.at("episodes").get<int>();
    sac.updates_per_step = js.at("updates_per_step").get<int>();
    sac.warmup_steps = js.at("warmup_steps").get<int>();
    sac.action_scale = js.at("action_scale").get<double>();
    sac.hidden_sizes = js.at("hidden_sizes").get<std::vector<int>>();

    FilterConfig filt;
    filt.kappa = j.at("filter").at("kappa").get<double>();
    filt.alpha_gain = j.at("filter").at("alpha_gain").get<double>();

    SacAgent agent(env, sac, filt, 0);
    agent.policy_.trunk = mlp_from_json(j.at("policy").at("trunk"));
    agent.policy_.mean_head = mlp_from_json(j.at("policy").at("mean_head"));
    agent.policy_.log_std_head =
        mlp_from_json(j.at("policy").at("log_std_head"));
    agent.policy_.action_scale = j.at("policy").at("action_scale").get<double>();
    agent.critic1_ = mlp_from_json(j.at("critic1"));
    agent.critic2_ = mlp_from_json(j.at("critic2"));
    agent.target1_ = mlp_from_json(j.at("target1"));
    agent.target2_ = mlp_from_json(j.at("target2"));
    return agent;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<EpisodeMetrics>& metrics) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "episode,return,steps,min_hi_episode,min_composite_h_episode,"
         "policy_loss,critic_loss\n";
    f.precision(17);
    for (const auto& m : metrics) {
        f << m.episode << ',' << m.episode_return << ',' << m.steps << ','
          << m.min_hi << ',' << m.min_composite_h << ',' << m.policy_loss
          << ',' << m.critic_loss << '\n';
    }
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRow>& traces) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    const int I =
        traces.empty() ? 0 : static_cast<int>(traces.front().barrier_values.size());
    f << "episode,step,p_x,p_y,u_nom_x,u_nom_y,u_s_x,u_s_y,eta";
    for (int i = 1; i <= I; ++i) f << ",h_" << i;
    f << ",composite_h,reward,done\n";
    f.precision(17);
    for (const auto& r : traces) {
        f << r.episode << ',' << r.step << ',' << r.position.x() << ','
          << r.position.y() << ',' << r.nominal(0) << ',' << r.nominal(1)
          << ',' << r.safe(0) << ',' << r.safe(1) << ',' << r.eta;
        for (int i = 0; i < I; ++i) f << ',' << r.barrier_values(i);
        f << ',' << r.composite_h << ',' << r.reward << ','
          << (r.done ? 1 : 0) << '\n';
    }
}

}  // namespace cbfsl
