#include "cbfsl/barriers.hpp"

#include <cmath>

namespace cbfsl {

namespace {

void require_kappa(double kappa) {
    if (kappa <= 0.0)
        throw std::invalid_argument("kappa must be positive");
}

Eigen::VectorXd barrier_values(const BarrierSet& set, const StateVec& x) {
    if (set.count() < 1)
        throw std::invalid_argument("barrier set is empty");
    Eigen::VectorXd h(set.count());
    for (int i = 0; i < set.count(); ++i)
        h(i) = eval_barrier(set.barriers[i], x).value;
    return h;
}

}  // namespace

BarrierEval eval_barrier(const CircularObstacleBarrier& b, const StateVec& x) {
    if (x.size() < 2)
        throw std::invalid_argument("eval_barrier: state must have length >= 2");
    const Eigen::Vector2d p = x.head<2>();
    const Eigen::Vector2d d = p - b.center;
    BarrierEval out;
    out.value = d.squaredNorm() - b.radius * b.radius;
    out.gradient = Eigen::VectorXd::Zero(x.size());
    out.gradient.head<2>() = 2.0 * d;
    return out;
}

void smooth_min(const Eigen::VectorXd& values, double kappa, double* value,
                Eigen::VectorXd* weights) {
    require_kappa(kappa);
    const double vmin = values.minCoeff();
    // exp(-kappa (v_i - vmin)) has max 1, no overflow for any kappa * v_i.
    const Eigen::ArrayXd e = (-kappa * (values.array() - vmin)).exp();
    const double s = e.sum();
    if (value) *value = vmin - std::log(s) / kappa;
    if (weights) *weights = (e / s).matrix();
}

double composite_value(const BarrierSet& set, double kappa, const StateVec& x) {
    double h;
    smooth_min(barrier_values(set, x), kappa, &h, nullptr);
    return h;
}

Eigen::VectorXd composite_weights(const BarrierSet& set, double kappa,
                                  const StateVec& x) {
    Eigen::VectorXd w;
    smooth_min(barrier_values(set, x), kappa, nullptr, &w);
    return w;
}

CompositeEval composite_eval(const BarrierSet& set, double kappa,
                             const StateVec& x, const AffineSystem& sys) {
    if (x.size() != sys.n)
        throw std::invalid_argument("composite_eval: state/system dimension mismatch");
    if (x.size() < 2)
        throw std::invalid_argument("composite_eval: state must have length >= 2");
    const int I = set.count();
    if (I < 1)
        throw std::invalid_argument("barrier set is empty");

    // One fused pass over the barriers; gradients are rows of a single
    // matrix so the weighted sum is one GEMV.
    const Eigen::Vector2d p = x.head<2>();
    Eigen::VectorXd h(I);
    Eigen::MatrixXd grads = Eigen::MatrixXd::Zero(I, sys.n);
    for (int i = 0; i < I; ++i) {
        const CircularObstacleBarrier& b = set.barriers[i];
        const Eigen::Vector2d d = p - b.center;
        h(i) = d.squaredNorm() - b.radius * b.radius;
        grads(i, 0) = 2.0 * d.x();
        grads(i, 1) = 2.0 * d.y();
    }

    CompositeEval out;
    smooth_min(h, kappa, &out.value, &out.weights);
    out.gradient.noalias() = grads.transpose() * out.weights;

    const Eigen::VectorXd fx = eval_f(sys, x);
    const Eigen::MatrixXd gx = eval_g(sys, x);
    out.lie_f = out.gradient.dot(fx);
    out.lie_g.noalias() = out.gradient.transpose() * gx;
    return out;
}

BoundCheck bound_check(const BarrierSet& set, double kappa, const StateVec& x) {
    require_kappa(kappa);
    const Eigen::VectorXd h = barrier_values(set, x);
    BoundCheck out;
    smooth_min(h, kappa, &out.value, nullptr);
    out.upper = h.minCoeff();
    out.lower = out.upper - std::log(static_cast<double>(set.count())) / kappa;
    if (out.value < out.lower - 1e-9 || out.value > out.upper + 1e-9)
        throw std::logic_error("smooth-minimum bound violated (internal bug)");
    return out;
}

}  // namespace cbfsl
