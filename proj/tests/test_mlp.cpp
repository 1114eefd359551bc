#include <doctest.h>

#include <cmath>
#include <random>

#include "cbfsl/mlp.hpp"

using namespace cbfsl;

TEST_CASE("zero weights reduce the network to its biases") {
    std::mt19937_64 rng(1);
    Mlp net = mlp_init({3, 4, 2}, rng);
    for (auto& w : net.weights) w.setZero();
    net.biases[0].setZero();
    net.biases[1] << 0.25, -1.5;
    const Eigen::MatrixXd out = mlp_forward(net, Eigen::MatrixXd::Random(3, 5));
    for (int c = 0; c < out.cols(); ++c) {
        CHECK(out(0, c) == doctest::Approx(0.25));
        CHECK(out(1, c) == doctest::Approx(-1.5));
    }
}

TEST_CASE("single linear layer is a plain affine map") {
    std::mt19937_64 rng(2);
    Mlp net = mlp_init({2, 2}, rng);
    net.weights[0] << 1.0, 2.0, -1.0, 0.5;
    net.biases[0] << 0.1, -0.2;
    Eigen::MatrixXd x(2, 1);
    x << 3.0, -1.0;
    const Eigen::MatrixXd out = mlp_forward(net, x);
    CHECK(out(0, 0) == doctest::Approx(1.0 * 3.0 + 2.0 * -1.0 + 0.1));
    CHECK(out(1, 0) == doctest::Approx(-1.0 * 3.0 + 0.5 * -1.0 - 0.2));
}

TEST_CASE("output squash applies tanh to the last layer") {
    std::mt19937_64 rng(3);
    Mlp plain = mlp_init({2, 3, 2}, rng, false);
    Mlp squashed = plain;
    squashed.output_tanh = true;
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 4);
    const Eigen::MatrixXd a = mlp_forward(plain, x);
    const Eigen::MatrixXd b = mlp_forward(squashed, x);
    CHECK(b.isApprox(a.array().tanh().matrix(), 1e-14));
}

TEST_CASE("init shapes and bounds") {
    std::mt19937_64 rng(4);
    const Mlp net = mlp_init({5, 7, 7, 3}, rng);
    REQUIRE(net.layer_count() == 3);
    CHECK(net.input_size() == 5);
    CHECK(net.output_size() == 3);
    CHECK(net.weights[0].rows() == 7);
    CHECK(net.weights[0].cols() == 5);
    for (int l = 0; l < net.layer_count(); ++l) {
        const double bound = std::sqrt(6.0 / (net.weights[l].cols() +
                                              net.weights[l].rows()));
        CHECK(net.weights[l].cwiseAbs().maxCoeff() <= bound);
        CHECK(net.biases[l].isZero(0.0));
    }
    CHECK_THROWS_AS(mlp_init({4}, rng), std::invalid_argument);
}

TEST_CASE("backward matches finite differences") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const bool squash = trial % 2 == 0;
        Mlp net = mlp_init({3, 8, 5, 2}, rng, squash);
        const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 4);
        // Loss: sum of squared outputs over the batch.
        MlpTape tape;
        const Eigen::MatrixXd out = mlp_forward(net, x, &tape);
        MlpGrads grads = mlp_zero_grads(net);
        const Eigen::MatrixXd input_grad =
            mlp_backward(net, tape, (2.0 * out).eval(), &grads);

        const double step = 1e-6;
        auto loss_at = [&](const Mlp& n, const Eigen::MatrixXd& in) {
            return mlp_forward(n, in).squaredNorm();
        };
        for (int l = 0; l < net.layer_count(); ++l) {
            for (int r = 0; r < net.weights[l].rows(); ++r)
                for (int c = 0; c < net.weights[l].cols(); ++c) {
                    Mlp up = net, dn = net;
                    up.weights[l](r, c) += step;
                    dn.weights[l](r, c) -= step;
                    const double fd =
                        (loss_at(up, x) - loss_at(dn, x)) / (2.0 * step);
                    CHECK(grads.weights[l](r, c) ==
                          doctest::Approx(fd).epsilon(1e-4));
                }
            for (int r = 0; r < net.biases[l].size(); ++r) {
                Mlp up = net, dn = net;
                up.biases[l](r) += step;
                dn.biases[l](r) -= step;
                const double fd = (loss_at(up, x) - loss_at(dn, x)) / (2.0 * step);
                CHECK(grads.biases[l](r) == doctest::Approx(fd).epsilon(1e-4));
            }
        }
        for (int r = 0; r < x.rows(); ++r)
            for (int c = 0; c < x.cols(); ++c) {
                Eigen::MatrixXd up = x, dn = x;
                up(r, c) += step;
                dn(r, c) -= step;
                const double fd = (loss_at(net, up) - loss_at(net, dn)) / (2.0 * step);
                CHECK(input_grad(r, c) == doctest::Approx(fd).epsilon(1e-4));
            }
    }
}

TEST_CASE("adam descends a quadratic") {
    std::mt19937_64 rng(6);
    Mlp net = mlp_init({1, 1}, rng);
    net.weights[0](0, 0) = 2.0;
    net.biases[0](0) = -1.0;
    AdamOptimizer opt(net, 1e-2);
    Eigen::MatrixXd x(1, 1);
    x << 1.0;
    double first = 0.0, last = 0.0;
    for (int it = 0; it < 2000; ++it) {
        MlpTape tape;
        const Eigen::MatrixXd out = mlp_forward(net, x, &tape);
        const double loss = out.squaredNorm();
        if (it == 0) first = loss;
        last = loss;
        MlpGrads grads = mlp_zero_grads(net);
        mlp_backward(net, tape, (2.0 * out).eval(), &grads);
        opt.step(net, grads);
    }
    CHECK(first > 0.5);
    CHECK(last < 1e-6);
}

TEST_CASE("forward is deterministic and side-effect free") {
    std::mt19937_64 rng(7);
    const Mlp net = mlp_init({4, 6, 3}, rng);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 9);
    const Eigen::MatrixXd a = mlp_forward(net, x);
    const Eigen::MatrixXd b = mlp_forward(net, x);
    CHECK(a == b);
}
