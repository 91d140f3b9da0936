#include "pcgk/metrics/image_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "pcgk/common/error.hpp"

namespace pcgk::metrics {

namespace {

void require_same(const char* op, const ImageGrid& a, const ImageGrid& b) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                         std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                         std::to_string(b.channels()));
}

double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

}  // namespace

double mse(const ImageGrid& a, const ImageGrid& b) {
    require_same("mse", a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

double psnr_from_mse(double m) {
    if (m < 0.0) throw NumericError("psnr: negative mse");
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

double psnr(const ImageGrid& a, const ImageGrid& b) { return psnr_from_mse(mse(a, b)); }

double ssim(const ImageGrid& a, const ImageGrid& b) {
    require_same("ssim", a, b);
    const std::size_t w = kSsimWindow;
    if (a.height() < w || a.width() < w)
        throw ShapeError("ssim: image " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                         " smaller than the " + std::to_string(w) + "x" + std::to_string(w) + " window");
    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const double n = static_cast<double>(w * w);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t ch = 0; ch < a.channels(); ++ch)
        for (std::size_t r0 = 0; r0 + w <= a.height(); ++r0)
            for (std::size_t c0 = 0; c0 + w <= a.width(); ++c0) {
                double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
                for (std::size_t r = r0; r < r0 + w; ++r)
                    for (std::size_t c = c0; c < c0 + w; ++c) {
                        const double x = a.at(r, c, ch), y = b.at(r, c, ch);
                        sa += x;
                        sb += y;
                        saa += x * x;
                        sbb += y * y;
                        sab += x * y;
                    }
                const double ma = sa / n, mb = sb / n;
                const double va = saa / n - ma * ma, vb = sbb / n - mb * mb, cov = sab / n - ma * mb;
                total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
    return total / static_cast<double>(count);
}

double nmi(const ImageGrid& a, const ImageGrid& b, std::size_t bins) {
    require_same("nmi", a, b);
    if (bins < 2) throw ConfigError("nmi: bins must be >= 2");
    auto bin_of = [bins](double v) {
        const auto i = static_cast<std::size_t>(v * static_cast<double>(bins));
        return std::min(i, bins - 1);
    };
    std::vector<double> pa(bins, 0.0), pb(bins, 0.0), pab(bins * bins, 0.0);
    const double inc = 1.0 / static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto x = bin_of(a.data()[i]), y = bin_of(b.data()[i]);
        pa[x] += inc;
        pb[y] += inc;
        pab[x * bins + y] += inc;
    }
    const double ha = entropy(pa), hb = entropy(pb);
    if (ha + hb == 0.0) return 0.0;
    // I = H(A) + H(B) - H(A,B); identical images give H(A,B) == H(A) bitwise.
    const double mi = ha + hb - entropy(pab);
    return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

double chamfer_distance(std::span<const geometry::Vec3> a, std::span<const geometry::Vec3> b) {
    if (a.empty() || b.empty()) throw GeometryError("chamfer_distance: empty point set");
    auto directed = [](std::span<const geometry::Vec3> x, std::span<const geometry::Vec3> y) {
        double s = 0.0;
        for (const auto& p : x) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : y) best = std::min(best, geometry::squared_distance(p, q));
            s += best;
        }
        return s / static_cast<double>(x.size());
    };
    return directed(a, b) + directed(b, a);
}

std::string format_metric(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace pcgk::metrics
