#pragma once

#include <cstddef>
#include <utility>

#include "pcgk/tensor/value.hpp"

namespace pcgk::tensor {

/// Dense DFT bases. For a real image X (h,w):
///   Re F = C_h X C_w - S_h X S_w,   Im F = -(S_h X C_w + C_h X S_w)
/// with C[u][x] = cos(2 pi u x / n), S[u][x] = sin(2 pi u x / n).
struct Dft2Basis {
    Value cos_rows, sin_rows;  // (h,h)
    Value cos_cols, sin_cols;  // (w,w)
};

Dft2Basis dft2_matrices(std::size_t h, std::size_t w);

/// 2D DFT of x (h,w) or (B,h,w) through matmul; returns (real, imag).
std::pair<Value, Value> dft2(const Value& x);
std::pair<Value, Value> dft2(const Value& x, const Dft2Basis& basis);

}  // namespace pcgk::tensor
