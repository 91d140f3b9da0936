#include "pcgk/tensor/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcgk/common/error.hpp"
#include "pcgk/common/rng.hpp"

namespace pcgk::tensor {

namespace {

double eval(const LossBuilder& f) {
    const double v = f().item();
    if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
    return v;
}

}  // namespace

double grad_check(const LossBuilder& f, const std::vector<Value>& inputs, double h, std::size_t coords_per_input,
                  std::uint64_t seed) {
    if (!(h > 0.0)) throw NumericError("grad_check: step must be positive");
    std::vector<Value> vals = inputs;
    for (auto& v : vals) v.zero_grad();
    const Value loss = f();
    if (!std::isfinite(loss.item())) throw NumericError("grad_check: loss is not finite");
    backward(loss);

    Rng rng(seed);
    double worst = 0.0;
    for (auto& v : vals) {
        const std::vector<double> analytic = v.grad();
        std::vector<std::size_t> coords(v.size());
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (coords_per_input != 0 && coords.size() > coords_per_input) {
            for (std::size_t i = 0; i < coords_per_input; ++i)
                std::swap(coords[i], coords[i + uniform_index(rng, coords.size() - i)]);
            coords.resize(coords_per_input);
        }
        auto data = v.mutable_data();
        for (auto c : coords) {
            const double orig = data[c];
            data[c] = orig + h;
            const double fp = eval(f);
            data[c] = orig - h;
            const double fm = eval(f);
            data[c] = orig;
            const double fd = (fp - fm) / (2.0 * h);
            worst = std::max(worst, std::fabs(analytic[c] - fd) / std::max(1.0, std::fabs(analytic[c])));
        }
    }
    for (auto& v : vals) v.zero_grad();
    return worst;
}

double grad_check(const LossBuilder& f, const ParamStore& params, double h, std::size_t coords_per_input,
                  std::uint64_t seed) {
    std::vector<Value> inputs;
    for (const auto& [_, v] : params) inputs.push_back(v);
    return grad_check(f, inputs, h, coords_per_input, seed);
}

}  // namespace pcgk::tensor
