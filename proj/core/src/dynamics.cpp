#include "cbfsl/dynamics.hpp"

namespace cbfsl {

AffineSystem single_integrator_2d() {
    AffineSystem sys;
    sys.n = 2;
    sys.m = 2;
    sys.f = [](const StateVec&) { return Eigen::Vector2d::Zero().eval(); };
    sys.g = [](const StateVec&) { return Eigen::Matrix2d::Identity().eval(); };
    return sys;
}

Eigen::VectorXd eval_f(const AffineSystem& sys, const StateVec& x) {
    if (x.size() != sys.n)
        throw std::invalid_argument("eval_f: state has length " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(sys.n));
    Eigen::VectorXd fx = sys.f(x);
    if (fx.size() != sys.n)
        throw std::invalid_argument("eval_f: evaluator returned wrong shape");
    return fx;
}

Eigen::MatrixXd eval_g(const AffineSystem& sys, const StateVec& x) {
    if (x.size() != sys.n)
        throw std::invalid_argument("eval_g: state has length " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(sys.n));
    Eigen::MatrixXd gx = sys.g(x);
    if (gx.rows() != sys.n || gx.cols() != sys.m)
        throw std::invalid_argument("eval_g: evaluator returned wrong shape");
    return gx;
}

StateVec step_euler(const AffineSystem& sys, const StateVec& x,
                    const ActionVec& u, double dt) {
    if (dt <= 0.0)
        throw std::invalid_argument("step_euler: dt must be positive");
    if (u.size() != sys.m)
        throw std::invalid_argument("step_euler: action has length " +
                                    std::to_string(u.size()) + ", expected " +
                                    std::to_string(sys.m));
    return x + dt * (eval_f(sys, x) + eval_g(sys, x) * u);
}

}  // namespace cbfsl
