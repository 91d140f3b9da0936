#include "pcgk/model/layers.hpp"

#include <cmath>

#include "pcgk/common/error.hpp"
#include "pcgk/tensor/ops.hpp"

namespace pcgk::model {

namespace ops = pcgk::tensor;

Value fan_in_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
    const double a = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::vector<double> w(fan_in * fan_out);
    for (auto& x : w) x = uniform(rng, -a, a);
    return Value({fan_in, fan_out}, std::move(w));
}

Value add_bias(const Value& x, const Value& b) {
    const std::size_t n = b.size();
    if (x.shape().back() != n)
        throw ShapeError("add_bias: bias of " + std::to_string(n) + " against " + tensor::shape_str(x.shape()));
    const Value flat = ops::reshape(x, {x.size() / n, n});
    const Value rows = ops::broadcast_to(ops::reshape(b, {1, n}), flat.shape());
    return ops::reshape(ops::add(flat, rows), x.shape());
}

Value add_channel_bias(const Value& x, const Value& b) {
    if (x.rank() != 4 || x.dim(1) != b.size())
        throw ShapeError("add_channel_bias: bias of " + std::to_string(b.size()) + " against " +
                         tensor::shape_str(x.shape()));
    return ops::add(x, ops::broadcast_to(ops::reshape(b, {1, b.size(), 1, 1}), x.shape()));
}

Linear::Linear(ParamStore& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng)
    : w(ps.add(name + ".w", fan_in_uniform(rng, in, out))), b(ps.add(name + ".b", Value::zeros({out}))) {}

Value Linear::operator()(const Value& x) const {
    const std::size_t n_in = in();
    if (x.shape().back() != n_in)
        throw ShapeError("linear: expected last extent " + std::to_string(n_in) + ", got " +
                         tensor::shape_str(x.shape()));
    tensor::Shape out_shape = x.shape();
    out_shape.back() = out();
    const Value y = ops::matmul(ops::reshape(x, {x.size() / n_in, n_in}), w);
    return add_bias(ops::reshape(y, out_shape), b);
}

Mlp::Mlp(ParamStore& ps, const std::string& name, std::size_t in, std::size_t hidden, std::size_t out, Rng& rng)
    : fc1(ps, name + ".fc1", in, hidden, rng), fc2(ps, name + ".fc2", hidden, out, rng) {}

Value Mlp::operator()(const Value& x) const { return fc2(ops::gelu(fc1(x))); }

LayerNorm::LayerNorm(ParamStore& ps, const std::string& name, std::size_t d)
    : gamma(ps.add(name + ".g", Value::full({d}, 1.0))), beta(ps.add(name + ".b", Value::zeros({d}))) {}

Value LayerNorm::operator()(const Value& x) const { return ops::layer_norm(x, gamma, beta); }

TransformerBlock::TransformerBlock(ParamStore& ps, const std::string& name, std::size_t d, std::size_t heads_,
                                   std::size_t mlp_ratio, Rng& rng)
    : ln1(ps, name + ".ln1", d),
      ln2(ps, name + ".ln2", d),
      qkv(ps, name + ".attn.qkv", d, 3 * d, rng),
      proj(ps, name + ".attn.proj", d, d, rng),
      mlp(ps, name + ".mlp", d, mlp_ratio * d, d, rng),
      heads(heads_) {}

Value TransformerBlock::attention(const Value& x, Value* probs) const {
    if (x.rank() != 3) throw ShapeError("attention: expected (B,n,d), got " + tensor::shape_str(x.shape()));
    const std::size_t B = x.dim(0), n = x.dim(1), d = x.dim(2), dh = d / heads;
    // (B,n,3,H,dh) -> (3,B,H,n,dh)
    const Value t = ops::transpose(ops::reshape(qkv(x), {B, n, 3, heads, dh}), {2, 0, 3, 1, 4});
    auto part = [&](std::size_t i) { return ops::reshape(ops::slice(t, 0, i, i + 1), {B * heads, n, dh}); };
    const Value q = part(0), k = part(1), v = part(2);
    const Value scores = ops::scalar_mul(ops::matmul(q, ops::transpose_last(k)), 1.0 / std::sqrt(static_cast<double>(dh)));
    const Value p = ops::softmax(scores, 2);
    if (probs) *probs = p;
    const Value ctx = ops::transpose(ops::reshape(ops::matmul(p, v), {B, heads, n, dh}), {0, 2, 1, 3});
    return proj(ops::reshape(ctx, {B, n, d}));
}

Value TransformerBlock::operator()(const Value& x) const {
    const Value y = ops::add(x, attention(ln1(x)));
    return ops::add(y, mlp(ln2(y)));
}

}  // namespace pcgk::model
