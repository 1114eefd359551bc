#pragma once

#include <vector>

#include "cbfsl/dynamics.hpp"

namespace cbfsl {

/// Obstacle-avoidance barrier h(x) = ||p - center||^2 - radius^2, where p is
/// the first two state components.
struct CircularObstacleBarrier {
    Eigen::Vector2d center;
    double radius = 0.0;
};

/// Ordered set of barriers; index i is the constraint index.
struct BarrierSet {
    std::vector<CircularObstacleBarrier> barriers;

    int count() const { return static_cast<int>(barriers.size()); }
};

struct BarrierEval {
    double value = 0.0;
    Eigen::VectorXd gradient;  // length n
};

/// Composite smooth-minimum barrier with its softmax weights and Lie
/// derivatives with respect to an affine system.
struct CompositeEval {
    double value = 0.0;
    Eigen::VectorXd weights;   // length I, positive, sums to 1
    Eigen::VectorXd gradient;  // length n
    double lie_f = 0.0;
    Eigen::RowVectorXd lie_g;  // length m
};

BarrierEval eval_barrier(const CircularObstacleBarrier& b, const StateVec& x);

/// Smooth minimum of a value vector:
///   value = -(1/kappa) ln(sum_i exp(-kappa v_i)),
/// computed with a min-shift so nothing overflows. Also returns the softmax
/// weights w_i = exp(-kappa (v_i - value)), which sum to 1.
void smooth_min(const Eigen::VectorXd& values, double kappa, double* value,
                Eigen::VectorXd* weights);

double composite_value(const BarrierSet& set, double kappa, const StateVec& x);
Eigen::VectorXd composite_weights(const BarrierSet& set, double kappa,
                                  const StateVec& x);

/// Full composite evaluation: value, weights, gradient and Lie derivatives
/// L_f h, L_g h, all in one pass so the weights and gradient are consistent.
CompositeEval composite_eval(const BarrierSet& set, double kappa,
                             const StateVec& x, const AffineSystem& sys);

struct BoundCheck {
    double lower = 0.0;  // min_i h_i - ln(I)/kappa
    double value = 0.0;  // composite h
    double upper = 0.0;  // min_i h_i
};

/// Evaluates the smooth-minimum sandwich bounds and asserts they hold to
/// 1e-9; a violation indicates an implementation bug.
BoundCheck bound_check(const BarrierSet& set, double kappa, const StateVec& x);

}  // namespace cbfsl
