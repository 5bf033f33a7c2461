#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace levelk {

// Adaptive-moment gradient descent with bias correction.
struct OptimizerState {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;
    std::vector<double> m;  // first moment
    std::vector<double> v;  // second moment

    OptimizerState() = default;
    OptimizerState(double lr, std::size_t n_params) : learning_rate(lr), m(n_params, 0.0), v(n_params, 0.0) {}
};

inline void optimizer_step(std::vector<double>& params, const std::vector<double>& grad,
                           OptimizerState& opt) {
    if (params.size() != grad.size() || params.size() != opt.m.size()) {
        throw std::invalid_argument("optimizer_step: shape mismatch");
    }
    ++opt.step;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        opt.m[i] = opt.beta1 * opt.m[i] + (1.0 - opt.beta1) * grad[i];
        opt.v[i] = opt.beta2 * opt.v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
        const double m_hat = opt.m[i] / bc1;
        const double v_hat = opt.v[i] / bc2;
        params[i] -= opt.learning_rate * m_hat / (std::sqrt(v_hat) + opt.epsilon);
    }
}

}  // namespace levelk
