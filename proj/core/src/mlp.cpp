#include "cbfsl/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace cbfsl {

Mlp mlp_init(const std::vector<int>& layer_sizes, std::mt19937_64& rng,
             bool output_tanh) {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("mlp_init: need at least two layer sizes");
    Mlp net;
    net.output_tanh = output_tanh;
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        if (fan_in < 1 || fan_out < 1)
            throw std::invalid_argument("mlp_init: layer sizes must be positive");
        // Xavier-uniform, the usual choice for tanh nets.
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
}

MlpGrads mlp_zero_grads(const Mlp& net) {
    MlpGrads g;
    for (size_t l = 0; l < net.weights.size(); ++l) {
        g.weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(),
                                                  net.weights[l].cols()));
        g.biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    return g;
}

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& input,
                            MlpTape* tape) {
    if (input.rows() != net.input_size())
        throw std::invalid_argument("mlp_forward: input has " +
                                    std::to_string(input.rows()) +
                                    " rows, expected " +
                                    std::to_string(net.input_size()));
    if (tape) {
        tape->layer_inputs.clear();
        tape->layer_inputs.reserve(net.weights.size());
    }
    Eigen::MatrixXd a = input;
    for (int l = 0; l < net.layer_count(); ++l) {
        if (tape) tape->layer_inputs.push_back(a);
        a = (net.weights[l] * a).colwise() + net.biases[l];
        const bool last = l + 1 == net.layer_count();
        if (!last || net.output_tanh) a = a.array().tanh().matrix();
    }
    if (tape) tape->output = a;
    return a;
}

Eigen::MatrixXd mlp_backward(const Mlp& net, const MlpTape& tape,
                             const Eigen::MatrixXd& output_grad,
                             MlpGrads* grads) {
    if (tape.layer_inputs.size() != net.weights.size())
        throw std::invalid_argument("mlp_backward: tape does not match network");
    Eigen::MatrixXd delta = output_grad;
    Eigen::MatrixXd activated = tape.output;
    for (int l = net.layer_count() - 1; l >= 0; --l) {
        const bool last = l + 1 == net.layer_count();
        if (!last || net.output_tanh) {
            // tanh' = 1 - tanh^2, recovered from the stored activation.
            delta = (delta.array() * (1.0 - activated.array().square())).matrix();
        }
        if (grads) {
            grads->weights[l] += delta * tape.layer_inputs[l].transpose();
            grads->biases[l] += delta.rowwise().sum();
        }
        if (l > 0) {
            delta = net.weights[l].transpose() * delta;
            activated = tape.layer_inputs[l];
        } else {
            delta = net.weights[0].transpose() * delta;
        }
    }
    return delta;
}

AdamOptimizer::AdamOptimizer(const Mlp& net, double learning_rate)
    : lr_(learning_rate), m_(mlp_zero_grads(net)), v_(mlp_zero_grads(net)) {
    if (learning_rate <= 0.0)
        throw std::invalid_argument("AdamOptimizer: learning rate must be positive");
}

void AdamOptimizer::step(Mlp& net, const MlpGrads& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t l = 0; l < net.weights.size(); ++l) {
        m_.weights[l] = beta1_ * m_.weights[l] + (1.0 - beta1_) * grads.weights[l];
        v_.weights[l].array() = beta2_ * v_.weights[l].array() +
                                (1.0 - beta2_) * grads.weights[l].array().square();
        net.weights[l].array() -=
            lr_ * (m_.weights[l].array() / bc1) /
            ((v_.weights[l].array() / bc2).sqrt() + eps_);

        m_.biases[l] = beta1_ * m_.biases[l] + (1.0 - beta1_) * grads.biases[l];
        v_.biases[l].array() = beta2_ * v_.biases[l].array() +
                               (1.0 - beta2_) * grads.biases[l].array().square();
        net.biases[l].array() -=
            lr_ * (m_.biases[l].array() / bc1) /
            ((v_.biases[l].array() / bc2).sqrt() + eps_);
    }
}

}  // namespace cbfsl
