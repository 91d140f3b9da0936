#pragma once

// Brute-force reference implementations used only by tests. They share no code
// with the library paths they check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <limits>
#include <set>
#include <vector>

#include "pcgk/common/rng.hpp"
#include "pcgk/geometry/point_cloud.hpp"

namespace oracle {

using pcgk::geometry::Vec3;

inline double tolerance(const std::vector<Vec3>& p) {
    double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {-1e300, -1e300, -1e300};
    for (const auto& q : p)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], q[a]);
            hi[a] = std::max(hi[a], q[a]);
        }
    const double dx = hi[0] - lo[0], dy = hi[1] - lo[1], dz = hi[2] - lo[2];
    return 1e-9 * std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Strictly convex 2D hull (monotone chain) of the given planar coordinates.
inline std::vector<std::size_t> hull2d(const std::vector<std::pair<double, double>>& xy,
                                       const std::vector<std::size_t>& ids, double tol) {
    std::vector<std::size_t> order(xy.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return xy[a] < xy[b]; });
    auto turn = [&](std::size_t o, std::size_t a, std::size_t b) {
        return (xy[a].first - xy[o].first) * (xy[b].second - xy[o].second) -
               (xy[a].second - xy[o].second) * (xy[b].first - xy[o].first);
    };
    std::vector<std::size_t> chain(2 * order.size());
    std::size_t k = 0;
    for (auto i : order) {
        while (k >= 2 && turn(chain[k - 2], chain[k - 1], i) <= tol) --k;
        chain[k++] = i;
    }
    for (std::size_t t = order.size() - 1, lower = k + 1; t-- > 0;) {
        const auto i = order[t];
        while (k >= lower && turn(chain[k - 2], chain[k - 1], i) <= tol) --k;
        chain[k++] = i;
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i + 1 < k; ++i) out.push_back(ids[chain[i]]);
    return out;
}

// O(n^4) facet enumeration: a point is extreme iff it is a strict vertex of the
// planar hull of some supporting plane's point set.
inline std::vector<std::size_t> naive_hull_vertices(const std::vector<Vec3>& p) {
    const std::size_t n = p.size();
    const double eps = tolerance(p);
    std::set<std::size_t> verts;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                const Vec3 e1 = p[j] - p[i], e2 = p[k] - p[i];
                Vec3 nrm = pcgk::geometry::cross(e1, e2);
                const double len = pcgk::geometry::norm(nrm);
                if (len <= 1e-14 * pcgk::geometry::norm(e1) * pcgk::geometry::norm(e2) || len == 0.0) continue;
                nrm = nrm / len;
                bool above = false, below = false;
                std::vector<std::size_t> on;
                for (std::size_t l = 0; l < n; ++l) {
                    const double d = pcgk::geometry::dot(nrm, p[l] - p[i]);
                    if (d > eps) above = true;
                    else if (d < -eps) below = true;
                    else on.push_back(l);
                    if (above && below) break;
                }
                if (above && below) continue;
                if (on.size() == 3) {
                    verts.insert({i, j, k});
                    continue;
                }
                const Vec3 u = e1 / pcgk::geometry::norm(e1);
                const Vec3 w = pcgk::geometry::cross(nrm, u);
                std::vector<std::pair<double, double>> xy;
                for (auto l : on) xy.emplace_back(pcgk::geometry::dot(p[l] - p[i], u), pcgk::geometry::dot(p[l] - p[i], w));
                for (auto v : hull2d(xy, on, 1e-3 * eps)) verts.insert(v);
            }
    return {verts.begin(), verts.end()};
}

// Flip recomputed from the closed form, then the naive hull.
inline std::vector<std::size_t> naive_hpr_visible(const std::vector<Vec3>& pts, const Vec3& cam, double gamma) {
    std::vector<Vec3> flipped;
    double rmax = 0.0;
    for (const auto& q : pts) rmax = std::max(rmax, pcgk::geometry::norm(q - cam));
    const double R = gamma * rmax;
    for (const auto& q0 : pts) {
        const Vec3 q = q0 - cam;
        const double r = pcgk::geometry::norm(q);
        flipped.push_back(q * ((2.0 * R - r) / r));
    }
    flipped.push_back(Vec3{});
    std::vector<std::size_t> vis;
    for (auto v : naive_hull_vertices(flipped))
        if (v < pts.size()) vis.push_back(v);
    return vis;
}

inline std::vector<std::size_t> brute_fps(const std::vector<Vec3>& p, std::size_t m, std::uint64_t seed) {
    std::vector<std::size_t> chosen{static_cast<std::size_t>(seed % p.size())};
    while (chosen.size() < m) {
        std::size_t best = 0;
        double best_d = -1.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
            double d = std::numeric_limits<double>::infinity();
            for (auto c : chosen) d = std::min(d, pcgk::geometry::squared_distance(p[i], p[c]));
            if (d > best_d) {
                best_d = d;
                best = i;
            }
        }
        chosen.push_back(best);
    }
    return chosen;
}

inline std::vector<std::size_t> brute_knn(const Vec3& q, const std::vector<Vec3>& p, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < p.size(); ++i) d.emplace_back(pcgk::geometry::squared_distance(q, p[i]), i);
    std::sort(d.begin(), d.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(d[i].second);
    return out;
}

inline std::vector<Vec3> random_ball(pcgk::Rng& rng, std::size_t n, double radius = 0.35) {
    std::vector<Vec3> out;
    while (out.size() < n) {
        const Vec3 v{pcgk::uniform(rng, -1, 1), pcgk::uniform(rng, -1, 1), pcgk::uniform(rng, -1, 1)};
        if (pcgk::geometry::norm(v) <= 1.0) out.push_back(v * radius);
    }
    return out;
}

// Chamfer distance by double loop (squared distances, mean of minima both ways).
inline double brute_chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    auto directed = [](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
        double s = 0.0;
        for (const auto& p : x) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& q : y) m = std::min(m, pcgk::geometry::squared_distance(p, q));
            s += m;
        }
        return s / static_cast<double>(x.size());
    };
    return directed(a, b) + directed(b, a);
}

// Naive double-sum DFT, independent of the matmul route.
inline std::vector<std::complex<double>> naive_dft(std::span<const double> x, std::size_t h, std::size_t w) {
    std::vector<std::complex<double>> out(h * w);
    for (std::size_t u = 0; u < h; ++u)
        for (std::size_t v = 0; v < w; ++v) {
            std::complex<double> acc = 0.0;
            for (std::size_t a = 0; a < h; ++a)
                for (std::size_t b = 0; b < w; ++b) {
                    const double ang = -2.0 * std::numbers::pi *
                                       (static_cast<double>(u * a) / static_cast<double>(h) +
                                        static_cast<double>(v * b) / static_cast<double>(w));
                    acc += x[a * w + b] * std::complex<double>(std::cos(ang), std::sin(ang));
                }
            out[u * w + v] = acc;
        }
    return out;
}

// 2x2 average pooling of an n x n image.
inline std::vector<double> pool2(const std::vector<double>& x, std::size_t n) {
    std::vector<double> out((n / 2) * (n / 2));
    for (std::size_t r = 0; r < n / 2; ++r)
        for (std::size_t c = 0; c < n / 2; ++c)
            out[r * (n / 2) + c] =
                0.25 * (x[2 * r * n + 2 * c] + x[2 * r * n + 2 * c + 1] + x[(2 * r + 1) * n + 2 * c] +
                        x[(2 * r + 1) * n + 2 * c + 1]);
    return out;
}

// Multi-scale frequency loss from scalar loops: pyramid by 2x2 averaging, naive
// DFT of each level, mean of |Re| + |Im| of the spectrum difference, summed.
inline double naive_msfr(std::vector<double> gt, std::vector<double> pred, std::size_t n, std::size_t scales) {
    double total = 0.0;
    for (std::size_t s = 0; s < scales; ++s) {
        const auto fg = naive_dft(gt, n, n), fp = naive_dft(pred, n, n);
        double acc = 0.0;
        for (std::size_t i = 0; i < fg.size(); ++i) {
            const auto d = fg[i] - fp[i];
            acc += std::fabs(d.real()) + std::fabs(d.imag());
        }
        total += acc / static_cast<double>(fg.size());
        if (s + 1 < scales) {
            gt = pool2(gt, n);
            pred = pool2(pred, n);
            n /= 2;
        }
    }
    return total;
}

// Cross-modal instance discrimination from scalar loops; z and h are row-major (m, p).
inline double naive_cross_modal(const std::vector<double>& z, const std::vector<double>& h, std::size_t m,
                                std::size_t p, double tau) {
    auto row = [&](const std::vector<double>& v, std::size_t i) {
        std::vector<double> r(p);
        double n = 0.0;
        for (std::size_t j = 0; j < p; ++j) n += v[i * p + j] * v[i * p + j];
        for (std::size_t j = 0; j < p; ++j) r[j] = v[i * p + j] / std::sqrt(n);
        return r;
    };
    auto s = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double d = 0.0;
        for (std::size_t j = 0; j < p; ++j) d += a[j] * b[j];
        return d / tau;
    };
    auto l = [&](std::size_t i, const std::vector<double>& a, const std::vector<double>& b) {
        const auto ai = row(a, i);
        double den = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            if (k != i) den += std::exp(s(ai, row(a, k)));
            den += std::exp(s(ai, row(b, k)));
        }
        return -std::log(std::exp(s(ai, row(b, i))) / den);
    };
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += l(i, z, h) + l(i, h, z);
    return total / (2.0 * static_cast<double>(m));
}

}  // namespace oracle
