#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace cbfsl {

using StateVec = Eigen::VectorXd;
using ActionVec = Eigen::VectorXd;

/// Control-affine system xdot = f(x) + g(x) u with declared dimensions.
/// Evaluators must be deterministic and return finite values of the
/// declared shape for every finite input.
struct AffineSystem {
    int n = 0;  // state dimension
    int m = 0;  // input dimension
    std::function<Eigen::VectorXd(const StateVec&)> f;
    std::function<Eigen::MatrixXd(const StateVec&)> g;
};

/// Planar point mass: n = m = 2, f(x) = 0, g(x) = I.
AffineSystem single_integrator_2d();

Eigen::VectorXd eval_f(const AffineSystem& sys, const StateVec& x);
Eigen::MatrixXd eval_g(const AffineSystem& sys, const StateVec& x);

/// Explicit forward Euler: x + dt * (f(x) + g(x) u).
StateVec step_euler(const AffineSystem& sys, const StateVec& x,
                    const ActionVec& u, double dt);

}  // namespace cbfsl
