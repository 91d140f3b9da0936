#include "pcgk/harness/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "pcgk/common/error.hpp"

namespace pcgk::harness {

void AdamW::step(tensor::ParamStore& params, double lr, double weight_decay) {
    for (const auto& [name, p] : params) {
        if (p.node()->grad.empty()) continue;
        for (double g : p.node()->grad)
            if (!std::isfinite(g)) throw NumericError("optimizer: non-finite gradient in parameter '" + name + "'");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    for (const auto& [name, p] : params) {
        auto& data = p.node()->data;
        const auto grad = p.grad();
        auto& m = m_[name];
        auto& v = v_[name];
        if (m.empty()) {
            m.assign(data.size(), 0.0);
            v.assign(data.size(), 0.0);
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
            m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * grad[i];
            v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * grad[i] * grad[i];
            data[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + opts_.eps);
            data[i] -= lr * weight_decay * data[i];
        }
    }
}

double cosine_lr(double base, std::size_t t, std::size_t total, std::size_t warmup) {
    if (t < warmup) return base * static_cast<double>(t + 1) / static_cast<double>(warmup);
    if (total <= warmup) return base;
    const double frac = static_cast<double>(t - warmup) / static_cast<double>(total - warmup);
    return base * 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(frac, 1.0)));
}

}  // namespace pcgk::harness
