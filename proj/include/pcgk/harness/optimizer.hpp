#pragma once

#include <map>
#include <string>
#include <vector>

#include "pcgk/tensor/param_store.hpp"

namespace pcgk::harness {

struct AdamWOptions {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

/// AdamW with decoupled weight decay; moments are kept per parameter name.
class AdamW {
public:
    explicit AdamW(AdamWOptions opts = {}) : opts_(opts) {}

    /// One update from the accumulated gradients. Throws NumericError naming the
    /// parameter when a gradient is not finite; no parameter is modified then.
    void step(tensor::ParamStore& params, double lr, double weight_decay);

    std::size_t steps() const { return t_; }

private:
    AdamWOptions opts_;
    std::size_t t_ = 0;
    std::map<std::string, std::vector<double>> m_, v_;
};

/// Linear warmup to `base` over `warmup` steps, then cosine decay to 0 at `total`:
/// base * 0.5 * (1 + cos(pi * (t - warmup) / (total - warmup))).
double cosine_lr(double base, std::size_t t, std::size_t total, std::size_t warmup);

}  // namespace pcgk::harness
