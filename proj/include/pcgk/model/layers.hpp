#pragma once

#include <string>

#include "pcgk/common/rng.hpp"
#include "pcgk/tensor/param_store.hpp"
#include "pcgk/tensor/value.hpp"

namespace pcgk::model {

using tensor::ParamStore;
using tensor::Value;

/// (fan_in, fan_out) weights drawn from Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Value fan_in_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out);

/// Adds `b` of shape {n} to every row of x (..., n).
Value add_bias(const Value& x, const Value& b);

/// Adds b of shape {C} to each channel of x (B,C,H,W).
Value add_channel_bias(const Value& x, const Value& b);

/// y = x W + b over the last axis of x; any leading shape.
struct Linear {
    Value w, b;
    Linear() = default;
    Linear(ParamStore& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng);
    Value operator()(const Value& x) const;
    std::size_t in() const { return w.dim(0); }
    std::size_t out() const { return w.dim(1); }
};

/// Linear, gelu, Linear.
struct Mlp {
    Linear fc1, fc2;
    Mlp() = default;
    Mlp(ParamStore& ps, const std::string& name, std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);
    Value operator()(const Value& x) const;
};

struct LayerNorm {
    Value gamma, beta;
    LayerNorm() = default;
    LayerNorm(ParamStore& ps, const std::string& name, std::size_t d);
    Value operator()(const Value& x) const;
};

/// Pre-norm transformer block on (B, n, d): x += MHSA(LN(x)); x += MLP(LN(x)).
struct TransformerBlock {
    LayerNorm ln1, ln2;
    Linear qkv, proj;
    Mlp mlp;
    std::size_t heads = 1;

    TransformerBlock() = default;
    TransformerBlock(ParamStore& ps, const std::string& name, std::size_t d, std::size_t heads, std::size_t mlp_ratio,
                     Rng& rng);
    Value operator()(const Value& x) const;
    /// Multi-head self-attention on already normalized input. If `probs` is set it
    /// receives the attention weights, shape (B*heads, n, n).
    Value attention(const Value& x, Value* probs = nullptr) const;
};

}  // namespace pcgk::model
