#include "fer/adam.hpp"

#include <cmath>

#include "fer/error.hpp"

namespace fer {

void adam_update(std::span<double> theta, std::span<const double> grad,
                 std::span<double> m, std::span<double> v,
                 long long t, const AdamConfig& cfg) {
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        theta[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

void AdamOptimizer::step(const std::vector<Parameter*>& params) {
    // Validate before mutating anything so a rejected step leaves the
    // parameters and moments exactly as they were.
    for (const Parameter* p : params) {
        for (double g : p->tensor->grad) {
            if (!std::isfinite(g))
                throw numeric_error("adam: non-finite gradient in parameter '" + p->id + "'");
        }
    }
    ++t_;
    for (Parameter* p : params) {
        auto& slot = slots_[p->id];
        auto& tensor = *p->tensor;
        if (slot.m.empty()) {
            slot.m.assign(tensor.values.size(), 0.0);
            slot.v.assign(tensor.values.size(), 0.0);
        }
        if (tensor.grad.empty()) tensor.ensure_grad();  // absent gradient = zero
        adam_update(tensor.values, tensor.grad, slot.m, slot.v, t_, cfg_);
    }
}

const AdamOptimizer::Slot* AdamOptimizer::slot(const std::string& id) const {
    auto it = slots_.find(id);
    return it == slots_.end() ? nullptr : &it->second;
}

}  // namespace fer
