#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace cbfsl {

/// Fully connected network with tanh hidden activations. When output_tanh is
/// set, the last layer is squashed too (used for the policy trunk).
/// Inputs are batched as matrix columns.
struct Mlp {
    std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
    std::vector<Eigen::VectorXd> biases;
    bool output_tanh = false;

    int input_size() const { return static_cast<int>(weights.front().cols()); }
    int output_size() const { return static_cast<int>(weights.back().rows()); }
    int layer_count() const { return static_cast<int>(weights.size()); }
};

/// Activation record from one forward pass; sufficient for an exact
/// gradient replay on the same batch.
struct MlpTape {
    std::vector<Eigen::MatrixXd> layer_inputs;  // input to each layer
    Eigen::MatrixXd output;
};

struct MlpGrads {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

Mlp mlp_init(const std::vector<int>& layer_sizes, std::mt19937_64& rng,
             bool output_tanh = false);

MlpGrads mlp_zero_grads(const Mlp& net);

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& input,
                            MlpTape* tape = nullptr);

/// Accumulates parameter gradients into *grads and returns the gradient with
/// respect to the input batch.
Eigen::MatrixXd mlp_backward(const Mlp& net, const MlpTape& tape,
                             const Eigen::MatrixXd& output_grad,
                             MlpGrads* grads);

/// Adam over one Mlp's parameters.
class AdamOptimizer {
  public:
    AdamOptimizer(const Mlp& net, double learning_rate);

    void step(Mlp& net, const MlpGrads& grads);

  private:
    double lr_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long t_ = 0;
    MlpGrads m_, v_;
};

}  // namespace cbfsl
