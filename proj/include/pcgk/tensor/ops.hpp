#pragma once

#include <vector>

#include "pcgk/tensor/value.hpp"

// Differentiable primitives. Shapes never broadcast implicitly: binary
// elementwise ops require identical shapes and broadcasting is an explicit
// `broadcast_to`. All shape violations throw ShapeError naming the op.
namespace pcgk::tensor {

/// (m,k)x(k,n), with an optional leading batch axis on either side.
Value matmul(const Value& a, const Value& b);

Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value div(const Value& a, const Value& b);
Value scalar_mul(const Value& x, double c);
Value add_scalar(const Value& x, double c);

Value relu(const Value& x);
/// Exact (erf) GELU.
Value gelu(const Value& x);
Value sigmoid(const Value& x);
Value exp(const Value& x);
Value log(const Value& x);
/// Subgradient 0 at the kink.
Value abs(const Value& x);
Value square(const Value& x);
Value sqrt(const Value& x);

/// Full reductions to a scalar of shape {1}.
Value sum(const Value& x);
Value mean(const Value& x);
Value sum_axis(const Value& x, std::size_t axis, bool keepdim = false);
Value mean_axis(const Value& x, std::size_t axis, bool keepdim = false);
/// Gradient routes to the first maximal entry.
Value max_axis(const Value& x, std::size_t axis, bool keepdim = false);
Value min_axis(const Value& x, std::size_t axis, bool keepdim = false);
Value softmax(const Value& x, std::size_t axis);

/// Normalizes over the last axis; gamma and beta have shape {last extent}.
Value layer_norm(const Value& x, const Value& gamma, const Value& beta, double eps = 1e-5);

Value concat(const std::vector<Value>& parts, std::size_t axis);
Value reshape(const Value& x, Shape shape);
Value transpose(const Value& x, const std::vector<std::size_t>& perm);
/// Swaps the last two axes.
Value transpose_last(const Value& x);
Value slice(const Value& x, std::size_t axis, std::size_t begin, std::size_t end);
/// Same rank; every source extent is 1 or equal to the target extent.
Value broadcast_to(const Value& x, const Shape& shape);

/// x: (B,C,H,W), kernel: (O,C,kh,kw) -> (B,O,Ho,Wo).
Value conv2d(const Value& x, const Value& kernel, std::size_t stride = 1, std::size_t pad = 0);

/// Adjoint of conv2d with the same kernel: y: (B,O,Ho,Wo) -> (B,C,H,W).
/// H,W default to (Ho-1)*stride - 2*pad + kh; any explicit size must map back to Ho under conv2d.
Value conv2d_transpose(const Value& y, const Value& kernel, std::size_t stride = 1, std::size_t pad = 0,
                       std::size_t out_h = 0, std::size_t out_w = 0);

}  // namespace pcgk::tensor
