#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pcgk/tensor/param_store.hpp"
#include "pcgk/tensor/value.hpp"

namespace pcgk::tensor {

using LossBuilder = std::function<Value()>;

/// Max over sampled coordinates of |analytic - central difference| / max(1, |analytic|).
/// At most `coords_per_input` coordinates are probed per input (all if 0).
/// Throws NumericError on a non-finite loss.
double grad_check(const LossBuilder& f, const std::vector<Value>& inputs, double h = 1e-6,
                  std::size_t coords_per_input = 0, std::uint64_t seed = 0);

double grad_check(const LossBuilder& f, const ParamStore& params, double h = 1e-6, std::size_t coords_per_input = 0,
                  std::uint64_t seed = 0);

}  // namespace pcgk::tensor
