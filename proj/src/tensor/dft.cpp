#include "pcgk/tensor/dft.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "pcgk/common/error.hpp"
#include "pcgk/tensor/ops.hpp"

namespace pcgk::tensor {

namespace {

std::pair<Value, Value> basis(std::size_t n) {
    std::vector<double> c(n * n), s(n * n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t x = 0; x < n; ++x) {
            // Reduce u*x mod n first so large products keep full precision.
            const double angle = 2.0 * std::numbers::pi * static_cast<double>((u * x) % n) / static_cast<double>(n);
            c[u * n + x] = std::cos(angle);
            s[u * n + x] = std::sin(angle);
        }
    return {Value({n, n}, std::move(c)), Value({n, n}, std::move(s))};
}

}  // namespace

Dft2Basis dft2_matrices(std::size_t h, std::size_t w) {
    if (h == 0 || w == 0) throw ShapeError("dft2_matrices: sizes must be >= 1");
    auto [ch, sh] = basis(h);
    auto [cw, sw] = basis(w);
    return {ch, sh, cw, sw};
}

std::pair<Value, Value> dft2(const Value& x, const Dft2Basis& b) {
    const std::size_t r = x.rank();
    if (r != 2 && r != 3) throw ShapeError("complex_dft: expected (h,w) or (B,h,w), got " + shape_str(x.shape()));
    if (x.dim(r - 2) != b.cos_rows.dim(0) || x.dim(r - 1) != b.cos_cols.dim(0))
        throw ShapeError("complex_dft: basis sized for (" + std::to_string(b.cos_rows.dim(0)) + "," +
                         std::to_string(b.cos_cols.dim(0)) + "), got " + shape_str(x.shape()));
    const Value cx = matmul(b.cos_rows, x);
    const Value sx = matmul(b.sin_rows, x);
    Value re = sub(matmul(cx, b.cos_cols), matmul(sx, b.sin_cols));
    Value im = scalar_mul(add(matmul(sx, b.cos_cols), matmul(cx, b.sin_cols)), -1.0);
    return {re, im};
}

std::pair<Value, Value> dft2(const Value& x) {
    const std::size_t r = x.rank();
    if (r != 2 && r != 3) throw ShapeError("complex_dft: expected (h,w) or (B,h,w), got " + shape_str(x.shape()));
    return dft2(x, dft2_matrices(x.dim(r - 2), x.dim(r - 1)));
}

}  // namespace pcgk::tensor
