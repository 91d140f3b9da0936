#include "pcgk/geometry/sampling.hpp"

#include <algorithm>
#include <limits>

#include "pcgk/common/error.hpp"

namespace pcgk::geometry {

std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3> points, std::size_t m, std::uint64_t seed) {
    const std::size_t n = points.size();
    if (m == 0 || m > n)
        throw GeometryError("farthest_point_sampling: m = " + std::to_string(m) + " outside [1, " +
                            std::to_string(n) + "]");
    std::vector<std::size_t> picked;
    picked.reserve(m);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    std::size_t cur = static_cast<std::size_t>(seed % n);
    for (std::size_t s = 0; s < m; ++s) {
        picked.push_back(cur);
        min_d2[cur] = -1.0;
        std::size_t best = n;
        double best_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (min_d2[i] < 0.0) continue;
            min_d2[i] = std::min(min_d2[i], squared_distance(points[i], points[cur]));
            if (min_d2[i] > best_d) {
                best_d = min_d2[i];
                best = i;
            }
        }
        cur = best;
    }
    return picked;
}

std::vector<std::size_t> knn(const Vec3& query, std::span<const Vec3> points, std::size_t k) {
    const std::size_t n = points.size();
    if (k == 0 || k > n)
        throw GeometryError("knn: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = {squared_distance(query, points[i]), i};
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
    return out;
}

}  // namespace pcgk::geometry
