#include "core/adam.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace celf {

void AdamConfig::validate() const {
    if (!(lr > 0.0)) fail_invalid("adam: learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) fail_invalid("adam: beta1 must lie in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) fail_invalid("adam: beta2 must lie in [0,1)");
    if (!(eps > 0.0)) fail_invalid("adam: eps must be positive");
}

Adam::Adam(size_t n, AdamConfig cfg) : cfg_(cfg) {
    if (n == 0) fail_invalid("adam: empty parameter vector");
    cfg_.validate();
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
}

void Adam::step(double* params, const double* grads) {
    ++t_;
    double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < m_.size(); ++i) {
        double g = grads[i];
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
        double mhat = m_[i] / c1;
        double vhat = v_[i] / c2;
        params[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
}

void Adam::reset() {
    std::fill(m_.begin(), m_.end(), 0.0);
    std::fill(v_.begin(), v_.end(), 0.0);
    t_ = 0;
}

}  // namespace celf
