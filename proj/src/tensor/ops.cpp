#include "pcgk/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pcgk/common/error.hpp"

namespace pcgk::tensor {

using detail::Node;

namespace {

using BackwardFn = std::function<void(Node&)>;

[[noreturn]] void shape_fail(const char* op, const std::string& expected, const Shape& actual) {
    throw ShapeError(std::string(op) + ": expected " + expected + ", got " + shape_str(actual));
}

Value make_op(const char* op, Shape shape, std::vector<double> data, std::vector<Value> parents,
              BackwardFn backward_fn) {
    Value out(std::move(shape), std::move(data), false);
    Node* node = out.node();
    node->op = op;
    const bool needs = std::any_of(parents.begin(), parents.end(), [](const Value& p) { return p.requires_grad(); });
    if (needs) {
        node->requires_grad = true;
        node->parents.reserve(parents.size());
        for (auto& p : parents) node->parents.push_back(p.node_ptr());
        node->backward = std::move(backward_fn);
    }
    return out;
}

// Parent grad buffer, or nullptr if that parent does not take gradients.
double* pgrad(Node& self, std::size_t i) {
    Node& p = *self.parents[i];
    if (!p.requires_grad) return nullptr;
    p.ensure_grad();
    return p.grad.data();
}

const std::vector<double>& pdata(Node& self, std::size_t i) { return self.parents[i]->data; }

void require_same(const char* op, const Value& a, const Value& b) {
    if (a.shape() != b.shape()) shape_fail(op, "matching shape " + shape_str(a.shape()), b.shape());
}

struct AxisSplit {
    std::size_t outer, n, inner;
};

AxisSplit split_axis(const char* op, const Shape& shape, std::size_t axis) {
    if (axis >= shape.size()) shape_fail(op, "axis < rank " + std::to_string(shape.size()) + " (axis " +
                                             std::to_string(axis) + ")", shape);
    AxisSplit s{1, shape[axis], 1};
    for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
    return s;
}

Shape reduced_shape(const Shape& shape, std::size_t axis, bool keepdim) {
    Shape out = shape;
    if (keepdim) {
        out[axis] = 1;
    } else {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis));
        if (out.empty()) out = {1};
    }
    return out;
}

template <typename F, typename D>
Value unary(const char* op, const Value& x, F f, D df) {
    const auto& xd = x.data();
    std::vector<double> out(xd.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xd[i]);
    return make_op(op, x.shape(), std::move(out), {x}, [df](Node& self) {
        double* gx = pgrad(self, 0);
        if (!gx) return;
        const auto& xv = pdata(self, 0);
        for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += self.grad[i] * df(xv[i], self.data[i]);
    });
}

// out += a(m,k) * b(k,n)
void gemm(const double* a, const double* b, double* out, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* row = out + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            if (av == 0.0) continue;
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
        }
    }
}

// ga(m,k) += g(m,n) * b(k,n)^T
void gemm_grad_a(const double* g, const double* b, double* ga, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double* brow = b + p * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
            ga[i * k + p] += acc;
        }
    }
}

// gb(k,n) += a(m,k)^T * g(m,n)
void gemm_grad_b(const double* a, const double* g, double* gb, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            if (av == 0.0) continue;
            double* brow = gb + p * n;
            for (std::size_t j = 0; j < n; ++j) brow[j] += av * grow[j];
        }
    }
}

struct ConvDims {
    std::size_t batch, cin, h, w, cout, kh, kw, oh, ow, stride, pad;
};

// y += conv(x, K)
void conv_fwd(const ConvDims& d, const double* x, const double* k, double* y) {
    const auto pad = static_cast<std::ptrdiff_t>(d.pad);
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t o = 0; o < d.cout; ++o) {
            double* yo = y + ((b * d.cout + o) * d.oh) * d.ow;
            for (std::size_t c = 0; c < d.cin; ++c) {
                const double* xc = x + ((b * d.cin + c) * d.h) * d.w;
                const double* kc = k + ((o * d.cin + c) * d.kh) * d.kw;
                for (std::size_t i = 0; i < d.kh; ++i)
                    for (std::size_t j = 0; j < d.kw; ++j) {
                        const double kv = kc[i * d.kw + j];
                        for (std::size_t oy = 0; oy < d.oh; ++oy) {
                            const auto iy = static_cast<std::ptrdiff_t>(oy * d.stride + i) - pad;
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
                            for (std::size_t ox = 0; ox < d.ow; ++ox) {
                                const auto ix = static_cast<std::ptrdiff_t>(ox * d.stride + j) - pad;
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w)) continue;
                                yo[oy * d.ow + ox] += kv * xc[iy * static_cast<std::ptrdiff_t>(d.w) + ix];
                            }
                        }
                    }
            }
        }
}

// x += conv^T(y, K)
void conv_adj(const ConvDims& d, const double* y, const double* k, double* x) {
    const auto pad = static_cast<std::ptrdiff_t>(d.pad);
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t o = 0; o < d.cout; ++o) {
            const double* yo = y + ((b * d.cout + o) * d.oh) * d.ow;
            for (std::size_t c = 0; c < d.cin; ++c) {
                double* xc = x + ((b * d.cin + c) * d.h) * d.w;
                const double* kc = k + ((o * d.cin + c) * d.kh) * d.kw;
                for (std::size_t i = 0; i < d.kh; ++i)
                    for (std::size_t j = 0; j < d.kw; ++j) {
                        const double kv = kc[i * d.kw + j];
                        for (std::size_t oy = 0; oy < d.oh; ++oy) {
                            const auto iy = static_cast<std::ptrdiff_t>(oy * d.stride + i) - pad;
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
                            for (std::size_t ox = 0; ox < d.ow; ++ox) {
                                const auto ix = static_cast<std::ptrdiff_t>(ox * d.stride + j) - pad;
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w)) continue;
                                xc[iy * static_cast<std::ptrdiff_t>(d.w) + ix] += kv * yo[oy * d.ow + ox];
                            }
                        }
                    }
            }
        }
}

// gK += d<y, conv(x,K)>/dK
void conv_kgrad(const ConvDims& d, const double* x, const double* y, double* gk) {
    const auto pad = static_cast<std::ptrdiff_t>(d.pad);
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t o = 0; o < d.cout; ++o) {
            const double* yo = y + ((b * d.cout + o) * d.oh) * d.ow;
            for (std::size_t c = 0; c < d.cin; ++c) {
                const double* xc = x + ((b * d.cin + c) * d.h) * d.w;
                double* kc = gk + ((o * d.cin + c) * d.kh) * d.kw;
                for (std::size_t i = 0; i < d.kh; ++i)
                    for (std::size_t j = 0; j < d.kw; ++j) {
                        double acc = 0.0;
                        for (std::size_t oy = 0; oy < d.oh; ++oy) {
                            const auto iy = static_cast<std::ptrdiff_t>(oy * d.stride + i) - pad;
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
                            for (std::size_t ox = 0; ox < d.ow; ++ox) {
                                const auto ix = static_cast<std::ptrdiff_t>(ox * d.stride + j) - pad;
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w)) continue;
                                acc += yo[oy * d.ow + ox] * xc[iy * static_cast<std::ptrdiff_t>(d.w) + ix];
                            }
                        }
                        kc[i * d.kw + j] += acc;
                    }
            }
        }
}

std::size_t conv_out(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
    if (in + 2 * pad < k) return 0;
    return (in + 2 * pad - k) / stride + 1;
}

// Index map out-flat -> in-flat for a permutation of axes.
std::vector<std::size_t> permute_map(const Shape& in, const std::vector<std::size_t>& perm, Shape& out_shape) {
    const std::size_t r = in.size();
    out_shape.resize(r);
    for (std::size_t i = 0; i < r; ++i) out_shape[i] = in[perm[i]];
    std::vector<std::size_t> in_strides(r, 1);
    for (std::size_t i = r - 1; i > 0; --i) in_strides[i - 1] = in_strides[i] * in[i];
    const std::size_t n = numel(in);
    std::vector<std::size_t> map(n);
    std::vector<std::size_t> idx(r, 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
        std::size_t src = 0;
        for (std::size_t i = 0; i < r; ++i) src += idx[i] * in_strides[perm[i]];
        map[flat] = src;
        for (std::size_t i = r; i-- > 0;) {
            if (++idx[i] < out_shape[i]) break;
            idx[i] = 0;
        }
    }
    return map;
}

Value gather_op(const char* op, const Value& x, Shape out_shape, std::vector<std::size_t> map) {
    const auto& xd = x.data();
    std::vector<double> out(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) out[i] = xd[map[i]];
    return make_op(op, std::move(out_shape), std::move(out), {x}, [map = std::move(map)](Node& self) {
        double* gx = pgrad(self, 0);
        if (!gx) return;
        for (std::size_t i = 0; i < map.size(); ++i) gx[map[i]] += self.grad[i];
    });
}

}  // namespace

Value matmul(const Value& a, const Value& b) {
    const auto ra = a.rank(), rb = b.rank();
    if ((ra != 2 && ra != 3) || (rb != 2 && rb != 3))
        throw ShapeError("matmul: operands must have rank 2 or 3, got " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
    const std::size_t m = a.dim(ra - 2), k = a.dim(ra - 1);
    const std::size_t kb = b.dim(rb - 2), n = b.dim(rb - 1);
    if (k != kb)
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    std::size_t batch = 1;
    if (ra == 3 && rb == 3 && a.dim(0) != b.dim(0))
        throw ShapeError("matmul: batch extents differ, " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    if (ra == 3) batch = a.dim(0);
    if (rb == 3) batch = b.dim(0);
    const std::size_t sa = ra == 3 ? m * k : 0, sb = rb == 3 ? k * n : 0;

    std::vector<double> out(batch * m * n, 0.0);
    const auto& ad = a.data();
    const auto& bd = b.data();
    for (std::size_t t = 0; t < batch; ++t) gemm(ad.data() + t * sa, bd.data() + t * sb, out.data() + t * m * n, m, k, n);

    Shape shape = (ra == 3 || rb == 3) ? Shape{batch, m, n} : Shape{m, n};
    return make_op("matmul", std::move(shape), std::move(out), {a, b}, [=](Node& self) {
        const auto& av = pdata(self, 0);
        const auto& bv = pdata(self, 1);
        double* ga = pgrad(self, 0);
        double* gb = pgrad(self, 1);
        for (std::size_t t = 0; t < batch; ++t) {
            const double* g = self.grad.data() + t * m * n;
            if (ga) gemm_grad_a(g, bv.data() + t * sb, ga + t * sa, m, k, n);
            if (gb) gemm_grad_b(av.data() + t * sa, g, gb + t * sb, m, k, n);
        }
    });
}

Value add(const Value& a, const Value& b) {
    require_same("add", a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
    return make_op("add", a.shape(), std::move(out), {a, b}, [](Node& self) {
        for (std::size_t p = 0; p < 2; ++p)
            if (double* g = pgrad(self, p))
                for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    });
}

Value sub(const Value& a, const Value& b) {
    require_same("sub", a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) - b.at(i);
    return make_op("sub", a.shape(), std::move(out), {a, b}, [](Node& self) {
        if (double* g = pgrad(self, 0))
            for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
        if (double* g = pgrad(self, 1))
            for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
    });
}

Value mul(const Value& a, const Value& b) {
    require_same("mul_elem", a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
    return make_op("mul_elem", a.shape(), std::move(out), {a, b}, [](Node& self) {
        const auto& av = pdata(self, 0);
        const auto& bv = pdata(self, 1);
        if (double* g = pgrad(self, 0))
            for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * bv[i];
        if (double* g = pgrad(self, 1))
            for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * av[i];
    });
}

Value div(const Value& a, const Value& b) {
    require_same("div", a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) / b.at(i);
    return make_op("div", a.shape(), std::move(out), {a, b}, [](Node& self) {
        const auto& bv = pdata(self, 1);
        if (double* g = pgrad(self, 0))
            for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] / bv[i];
        if (double* g = pgrad(self, 1))
            for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i] * self.data[i] / bv[i];
    });
}

Value scalar_mul(const Value& x, double c) {
    return unary("scalar_mul", x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

Value add_scalar(const Value& x, double c) {
    return unary("add_scalar", x, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

Value relu(const Value& x) {
    return unary("relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
                 [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Value gelu(const Value& x) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    constexpr double inv_sqrt2pi = 0.39894228040143267794;
    return unary(
        "gelu", x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
        [](double v, double) { return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) + v * inv_sqrt2pi * std::exp(-0.5 * v * v); });
}

Value sigmoid(const Value& x) {
    return unary(
        "sigmoid", x,
        [](double v) {
            if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
            const double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Value exp(const Value& x) {
    return unary("exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Value log(const Value& x) {
    return unary("log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Value abs(const Value& x) {
    return unary("abs", x, [](double v) { return std::fabs(v); },
                 [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Value square(const Value& x) {
    return unary("square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Value sqrt(const Value& x) {
    return unary("sqrt", x, [](double v) { return std::sqrt(v); }, [](double, double y) { return 0.5 / y; });
}

Value sum(const Value& x) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    return make_op("sum", {1}, {s}, {x}, [](Node& self) {
        double* gx = pgrad(self, 0);
        if (!gx) return;
        const std::size_t n = self.parents[0]->data.size();
        for (std::size_t i = 0; i < n; ++i) gx[i] += self.grad[0];
    });
}

Value mean(const Value& x) {
    const double inv = 1.0 / static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x.data()) s += v;
    return make_op("mean", {1}, {s * inv}, {x}, [inv](Node& self) {
        double* gx = pgrad(self, 0);
        if (!gx) return;
        const std::size_t n = self.parents[0]->data.size();
        for (std::size_t i = 0; i < n; ++i) gx[i] += self.grad[0] * inv;
    });
}

namespace {

Value sum_axis_scaled(const char* op, const Value& x, std::size_t axis, bool keepdim, bool average) {
    const auto s = split_axis(op, x.shape(), axis);
    const double scale = average ? 1.0 / static_cast<double>(s.n) : 1.0;
    std::vector<double> out(s.outer * s.inner, 0.0);
    const auto& xd = x.data();
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t i = 0; i < s.n; ++i)
            for (std::size_t j = 0; j < s.inner; ++j) out[o * s.inner + j] += xd[(o * s.n + i) * s.inner + j];
    if (average)
        for (auto& v : out) v *= scale;
    return make_op(op, reduced_shape(x.shape(), axis, keepdim), std::move(out), {x}, [s, scale](Node& self) {
        double* gx = pgrad(self, 0);
        if (!gx) return;
        for (std::size_t o = 0; o < s.outer; ++o)
            for (std::size_t i = 0; i < s.n; ++i)
                for (std::size_t j = 0; j < s.inner; ++j)
                    gx[(o * s.n + i) * s.inner + j] += scale * self.grad[o * s.inner + j];
    });
}

Value extremum_axis(const char* op, const Value& x, std::size_t axis, bool keepdim, bool take_max) {
    const auto s = split_axis(op, x.shape(), axis);
    std::vector<double> out(s.outer * s.inner);
    std::vector<std::size_t> arg(s.outer * s.inner);
    const auto& xd = x.data();
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t j = 0; j < s.inner; ++j) {
            std::size_t best = o * s.n * s.inner + j;
            for (std::size_t i = 1; i < s.n; ++i) {
                const std::size_t idx = (o * s.n + i) * s.inner + j;
                if (take_max ? xd[idx] > xd[best] : xd[idx] < xd[best]) best = idx;
            }
            out[o * s.inner + j] = xd[best];
            arg[o * s.inner + j] = best;
        }
    return make_op(op, reduced_shape(x.shape(), axis, keepdim), std::move(out), {x},
                   [arg = std::move(arg)](Node& self) {
                       double* gx = pgrad(self, 0);
                       if (!gx) return;
                       for (std::size_t i = 0; i < arg.size(); ++i) gx[arg[i]] += self.grad[i];
                   });
}

}  // namespace

Value sum_axis(const Value& x, std::size_t axis, bool keepdim) {
    return sum_axis_scaled("sum_axis", x, axis, keepdim, false);
}

Value mean_axis(const Value& x, std::size_t axis, bool keepdim) {
    return sum_axis_scaled("mean_axis", x, axis, keepdim, true);
}

Value max_axis(const Value& x, std::size_t axis, bool keepdim) {
    return extremum_axis("max_over_axis", x, axis, keepdim, true);
}

Value min_axis(const Value& x, std::size_t axis, bool keepdim) {
    return extremum_axis("min_over_axis", x, axis, keepdim, false);
}

Value softmax(const Value& x, std::size_t axis) {
    const auto s = split_axis("softmax_over_axis", x.shape(), axis);
    const auto& xd = x.data();
    std::vector<double> out(x.size());
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t j = 0; j < s.inner; ++j) {
            const std::size_t base = o * s.n * s.inner + j;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < s.n; ++i) mx = std::max(mx, xd[base + i * s.inner]);
            double z = 0.0;
            for (std::size_t i = 0; i < s.n; ++i) {
                const double e = std::exp(xd[base + i * s.inner] - mx);
                out[base + i * s.inner] = e;
                z += e;
            }
            for (std::size_t i = 0; i < s.n; ++i) out[base + i * s.inner] /= z;
        }
    return make_op("softmax_over_axis", x.shape(), std::move(out), {x}, [s](Node& self) {
        double* gx = pgrad(self, 0);
        if (!gx) return;
        const auto& y = self.data;
        const auto& g = self.grad;
        for (std::size_t o = 0; o < s.outer; ++o)
            for (std::size_t j = 0; j < s.inner; ++j) {
                const std::size_t base = o * s.n * s.inner + j;
                double dot = 0.0;
                for (std::size_t i = 0; i < s.n; ++i) dot += g[base + i * s.inner] * y[base + i * s.inner];
                for (std::size_t i = 0; i < s.n; ++i) {
                    const std::size_t idx = base + i * s.inner;
                    gx[idx] += y[idx] * (g[idx] - dot);
                }
            }
    });
}

Value layer_norm(const Value& x, const Value& gamma, const Value& beta, double eps) {
    const std::size_t d = x.shape().back();
    if (gamma.shape() != Shape{d}) shape_fail("layer_norm", "gamma of shape (" + std::to_string(d) + ")", gamma.shape());
    if (beta.shape() != Shape{d}) shape_fail("layer_norm", "beta of shape (" + std::to_string(d) + ")", beta.shape());
    const std::size_t rows = x.size() / d;
    const auto& xd = x.data();
    const auto& gd = gamma.data();
    const auto& bd = beta.data();
    std::vector<double> out(x.size()), xhat(x.size()), rstd(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = xd.data() + r * d;
        double mu = 0.0;
        for (std::size_t i = 0; i < d; ++i) mu += xr[i];
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t i = 0; i < d; ++i) var += (xr[i] - mu) * (xr[i] - mu);
        var /= static_cast<double>(d);
        rstd[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t i = 0; i < d; ++i) {
            xhat[r * d + i] = (xr[i] - mu) * rstd[r];
            out[r * d + i] = gd[i] * xhat[r * d + i] + bd[i];
        }
    }
    return make_op("layer_norm", x.shape(), std::move(out), {x, gamma, beta},
                   [d, rows, xhat = std::move(xhat), rstd = std::move(rstd)](Node& self) {
                       double* gx = pgrad(self, 0);
                       double* gg = pgrad(self, 1);
                       double* gb = pgrad(self, 2);
                       const auto& gam = pdata(self, 1);
                       const double inv_d = 1.0 / static_cast<double>(d);
                       for (std::size_t r = 0; r < rows; ++r) {
                           const double* g = self.grad.data() + r * d;
                           const double* xh = xhat.data() + r * d;
                           double m1 = 0.0, m2 = 0.0;
                           for (std::size_t i = 0; i < d; ++i) {
                               if (gg) gg[i] += g[i] * xh[i];
                               if (gb) gb[i] += g[i];
                               const double dxh = g[i] * gam[i];
                               m1 += dxh;
                               m2 += dxh * xh[i];
                           }
                           if (!gx) continue;
                           m1 *= inv_d;
                           m2 *= inv_d;
                           for (std::size_t i = 0; i < d; ++i)
                               gx[r * d + i] += rstd[r] * (g[i] * gam[i] - m1 - xh[i] * m2);
                       }
                   });
}

Value concat(const std::vector<Value>& parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const Shape& first = parts.front().shape();
    split_axis("concat", first, axis);
    Shape out_shape = first;
    out_shape[axis] = 0;
    std::vector<std::size_t> extents;
    for (const auto& p : parts) {
        Shape probe = p.shape();
        if (probe.size() != first.size()) shape_fail("concat", "rank " + std::to_string(first.size()), probe);
        probe[axis] = first[axis];
        if (probe != first) shape_fail("concat", "extents matching " + shape_str(first) + " off the concat axis", p.shape());
        extents.push_back(p.dim(axis));
        out_shape[axis] += p.dim(axis);
    }
    const auto s = split_axis("concat", out_shape, axis);
    std::vector<double> out(numel(out_shape));
    std::size_t offset = 0;
    for (std::size_t t = 0; t < parts.size(); ++t) {
        const auto& pd = parts[t].data();
        const std::size_t chunk = extents[t] * s.inner;
        for (std::size_t o = 0; o < s.outer; ++o)
            std::copy_n(pd.data() + o * chunk, chunk, out.data() + o * s.n * s.inner + offset * s.inner);
        offset += extents[t];
    }
    return make_op("concat", std::move(out_shape), std::move(out), parts, [s, extents](Node& self) {
        std::size_t offset = 0;
        for (std::size_t t = 0; t < extents.size(); ++t) {
            const std::size_t chunk = extents[t] * s.inner;
            if (double* g = pgrad(self, t))
                for (std::size_t o = 0; o < s.outer; ++o) {
                    const double* src = self.grad.data() + o * s.n * s.inner + offset * s.inner;
                    for (std::size_t i = 0; i < chunk; ++i) g[o * chunk + i] += src[i];
                }
            offset += extents[t];
        }
    });
}

Value reshape(const Value& x, Shape shape) {
    if (numel(shape) != x.size() || std::find(shape.begin(), shape.end(), 0) != shape.end())
        shape_fail("reshape", "a shape with " + std::to_string(x.size()) + " elements, target " + shape_str(shape),
                   x.shape());
    std::vector<double> out(x.data().begin(), x.data().end());
    return make_op("reshape", std::move(shape), std::move(out), {x}, [](Node& self) {
        double* gx = pgrad(self, 0);
        if (!gx) return;
        for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
    });
}

Value transpose(const Value& x, const std::vector<std::size_t>& perm) {
    const std::size_t r = x.rank();
    std::vector<bool> used(r, false);
    bool ok = perm.size() == r;
    for (std::size_t i = 0; ok && i < r; ++i) {
        ok = perm[i] < r && !used[perm[i]];
        if (ok) used[perm[i]] = true;
    }
    if (!ok) shape_fail("transpose", "a permutation of " + std::to_string(r) + " axes", x.shape());
    Shape out_shape;
    auto map = permute_map(x.shape(), perm, out_shape);
    return gather_op("transpose", x, std::move(out_shape), std::move(map));
}

Value transpose_last(const Value& x) {
    if (x.rank() < 2) shape_fail("transpose", "rank >= 2", x.shape());
    std::vector<std::size_t> perm(x.rank());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::swap(perm[perm.size() - 1], perm[perm.size() - 2]);
    return transpose(x, perm);
}

Value slice(const Value& x, std::size_t axis, std::size_t begin, std::size_t end) {
    const auto s = split_axis("slice", x.shape(), axis);
    if (begin >= end || end > s.n)
        shape_fail("slice", "range [" + std::to_string(begin) + "," + std::to_string(end) + ") inside axis " +
                                std::to_string(axis),
                   x.shape());
    Shape out_shape = x.shape();
    out_shape[axis] = end - begin;
    const std::size_t len = (end - begin) * s.inner;
    std::vector<std::size_t> map;
    map.reserve(s.outer * len);
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t i = 0; i < len; ++i) map.push_back(o * s.n * s.inner + begin * s.inner + i);
    return gather_op("slice", x, std::move(out_shape), std::move(map));
}

Value broadcast_to(const Value& x, const Shape& shape) {
    const Shape& in = x.shape();
    bool ok = in.size() == shape.size();
    for (std::size_t i = 0; ok && i < in.size(); ++i) ok = in[i] == shape[i] || in[i] == 1;
    if (!ok) shape_fail("broadcast_to", "extents of 1 or equal to target " + shape_str(shape), in);
    const std::size_t r = in.size();
    std::vector<std::size_t> in_strides(r, 1);
    for (std::size_t i = r - 1; i > 0; --i) in_strides[i - 1] = in_strides[i] * in[i];
    const std::size_t n = numel(shape);
    std::vector<std::size_t> map(n), idx(r, 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
        std::size_t src = 0;
        for (std::size_t i = 0; i < r; ++i)
            if (in[i] != 1) src += idx[i] * in_strides[i];
        map[flat] = src;
        for (std::size_t i = r; i-- > 0;) {
            if (++idx[i] < shape[i]) break;
            idx[i] = 0;
        }
    }
    return gather_op("broadcast_to", x, shape, std::move(map));
}

Value conv2d(const Value& x, const Value& kernel, std::size_t stride, std::size_t pad) {
    if (x.rank() != 4) shape_fail("conv2d", "input (B,C,H,W)", x.shape());
    if (kernel.rank() != 4 || kernel.dim(1) != x.dim(1))
        shape_fail("conv2d", "kernel (O," + std::to_string(x.dim(1)) + ",kh,kw)", kernel.shape());
    if (stride == 0) throw ShapeError("conv2d: stride must be positive");
    ConvDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3), kernel.dim(0), kernel.dim(2), kernel.dim(3), 0, 0, stride, pad};
    d.oh = conv_out(d.h, d.kh, stride, pad);
    d.ow = conv_out(d.w, d.kw, stride, pad);
    if (d.oh == 0 || d.ow == 0) shape_fail("conv2d", "input at least as large as the padded kernel", x.shape());
    std::vector<double> out(d.batch * d.cout * d.oh * d.ow, 0.0);
    conv_fwd(d, x.data().data(), kernel.data().data(), out.data());
    return make_op("conv2d", {d.batch, d.cout, d.oh, d.ow}, std::move(out), {x, kernel}, [d](Node& self) {
        if (double* gx = pgrad(self, 0)) conv_adj(d, self.grad.data(), pdata(self, 1).data(), gx);
        if (double* gk = pgrad(self, 1)) conv_kgrad(d, pdata(self, 0).data(), self.grad.data(), gk);
    });
}

Value conv2d_transpose(const Value& y, const Value& kernel, std::size_t stride, std::size_t pad, std::size_t out_h,
                       std::size_t out_w) {
    if (y.rank() != 4) shape_fail("conv2d_transpose", "input (B,O,Ho,Wo)", y.shape());
    if (kernel.rank() != 4 || kernel.dim(0) != y.dim(1))
        shape_fail("conv2d_transpose", "kernel (" + std::to_string(y.dim(1)) + ",C,kh,kw)", kernel.shape());
    if (stride == 0) throw ShapeError("conv2d_transpose: stride must be positive");
    ConvDims d{y.dim(0), kernel.dim(1), out_h, out_w, y.dim(1), kernel.dim(2), kernel.dim(3), y.dim(2), y.dim(3), stride, pad};
    auto natural = [&](std::size_t o, std::size_t k) -> std::size_t {
        const std::size_t full = (o - 1) * stride + k;
        return full > 2 * pad ? full - 2 * pad : 0;
    };
    if (d.h == 0) d.h = natural(d.oh, d.kh);
    if (d.w == 0) d.w = natural(d.ow, d.kw);
    if (d.h == 0 || d.w == 0 || conv_out(d.h, d.kh, stride, pad) != d.oh || conv_out(d.w, d.kw, stride, pad) != d.ow)
        shape_fail("conv2d_transpose", "an output size consistent with stride " + std::to_string(stride) + " pad " +
                                           std::to_string(pad),
                   y.shape());
    std::vector<double> out(d.batch * d.cin * d.h * d.w, 0.0);
    conv_adj(d, y.data().data(), kernel.data().data(), out.data());
    return make_op("conv2d_transpose", {d.batch, d.cin, d.h, d.w}, std::move(out), {y, kernel}, [d](Node& self) {
        if (double* gy = pgrad(self, 0)) conv_fwd(d, self.grad.data(), pdata(self, 1).data(), gy);
        if (double* gk = pgrad(self, 1)) conv_kgrad(d, self.grad.data(), pdata(self, 0).data(), gk);
    });
}

}  // namespace pcgk::tensor
