#include "pcgk/dataorg/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "pcgk/common/error.hpp"

namespace pcgk::dataorg {

using geometry::Vec3;

std::string to_string(ShapeClass c) {
    switch (c) {
        case ShapeClass::sphere: return "sphere";
        case ShapeClass::box: return "box";
        case ShapeClass::torus: return "torus";
        case ShapeClass::cylinder: return "cylinder";
    }
    return "unknown";
}

std::vector<Vec3> sample_sphere(Rng& rng, std::size_t n, double radius) {
    std::vector<Vec3> out;
    out.reserve(n);
    while (out.size() < n) {
        const Vec3 g{normal(rng), normal(rng), normal(rng)};
        const double len = geometry::norm(g);
        if (len < 1e-12) continue;
        out.push_back(g * (radius / len));
    }
    return out;
}

std::vector<Vec3> sample_box(Rng& rng, std::size_t n, const std::array<double, 3>& h) {
    // Face pair areas: the pair normal to axis a has area 4 * h_b * h_c each.
    const double area[3] = {h[1] * h[2], h[0] * h[2], h[0] * h[1]};
    const double total = area[0] + area[1] + area[2];
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pick = uniform01(rng) * total;
        const int axis = pick < area[0] ? 0 : (pick < area[0] + area[1] ? 1 : 2);
        double c[3];
        for (int a = 0; a < 3; ++a) c[a] = uniform(rng, -h[static_cast<std::size_t>(a)], h[static_cast<std::size_t>(a)]);
        c[axis] = uniform01(rng) < 0.5 ? -h[static_cast<std::size_t>(axis)] : h[static_cast<std::size_t>(axis)];
        out.push_back({c[0], c[1], c[2]});
    }
    return out;
}

std::vector<Vec3> sample_torus(Rng& rng, std::size_t n, double major, double minor) {
    // Area element is proportional to (R + r cos v); accept v with that weight.
    std::vector<Vec3> out;
    out.reserve(n);
    while (out.size() < n) {
        const double u = uniform(rng, 0, 2 * std::numbers::pi);
        const double v = uniform(rng, 0, 2 * std::numbers::pi);
        if (uniform01(rng) * (major + minor) > major + minor * std::cos(v)) continue;
        const double ring = major + minor * std::cos(v);
        out.push_back({ring * std::cos(u), ring * std::sin(u), minor * std::sin(v)});
    }
    return out;
}

std::vector<Vec3> sample_cylinder(Rng& rng, std::size_t n, double radius, double half_height) {
    const double side = 2 * std::numbers::pi * radius * 2 * half_height;
    const double caps = 2 * std::numbers::pi * radius * radius;
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = uniform(rng, 0, 2 * std::numbers::pi);
        if (uniform01(rng) * (side + caps) < side) {
            out.push_back({radius * std::cos(t), radius * std::sin(t), uniform(rng, -half_height, half_height)});
        } else {
            const double r = radius * std::sqrt(uniform01(rng));
            out.push_back({r * std::cos(t), r * std::sin(t), uniform01(rng) < 0.5 ? -half_height : half_height});
        }
    }
    return out;
}

std::array<double, 9> random_rotation(Rng& rng) {
    double q[4];
    double len = 0.0;
    while (len < 1e-12) {
        len = 0.0;
        for (double& x : q) {
            x = normal(rng);
            len += x * x;
        }
        len = std::sqrt(len);
    }
    const double w = q[0] / len, x = q[1] / len, y = q[2] / len, z = q[3] / len;
    return {1 - 2 * (y * y + z * z), 2 * (x * y - z * w),     2 * (x * z + y * w),
            2 * (x * y + z * w),     1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
            2 * (x * z - y * w),     2 * (y * z + x * w),     1 - 2 * (x * x + y * y)};
}

std::vector<Vec3> rotate(const std::vector<Vec3>& pts, const std::array<double, 9>& r) {
    std::vector<Vec3> out;
    out.reserve(pts.size());
    for (const auto& p : pts)
        out.push_back({r[0] * p.x + r[1] * p.y + r[2] * p.z, r[3] * p.x + r[4] * p.y + r[5] * p.z,
                       r[6] * p.x + r[7] * p.y + r[8] * p.z});
    return out;
}

geometry::PointCloud make_shape(ShapeClass c, std::size_t n_points, Rng& rng) {
    std::vector<Vec3> raw;
    switch (c) {
        case ShapeClass::sphere: raw = sample_sphere(rng, n_points); break;
        case ShapeClass::box:
            raw = sample_box(rng, n_points, {uniform(rng, 0.5, 1.0), uniform(rng, 0.5, 1.0), uniform(rng, 0.5, 1.0)});
            break;
        case ShapeClass::torus: raw = sample_torus(rng, n_points); break;
        case ShapeClass::cylinder: raw = sample_cylinder(rng, n_points, 0.5, uniform(rng, 0.5, 1.0)); break;
    }
    geometry::PointCloud cloud{rotate(raw, random_rotation(rng)), static_cast<int>(c)};
    return geometry::normalize_cloud(cloud);
}

std::vector<geometry::PointCloud> make_synthetic_dataset(std::size_t n_per_class, std::size_t n_points,
                                                         std::uint64_t seed) {
    if (n_per_class < 1) throw ConfigError("synthetic dataset: n_per_class must be >= 1");
    if (n_points < 64) throw ConfigError("synthetic dataset: n_points must be >= 64, got " + std::to_string(n_points));
    std::vector<geometry::PointCloud> out;
    out.reserve(n_per_class * kNumShapeClasses);
    for (int c = 0; c < kNumShapeClasses; ++c)
        for (std::size_t i = 0; i < n_per_class; ++i) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c), i));
            out.push_back(make_shape(static_cast<ShapeClass>(c), n_points, rng));
        }
    return out;
}

}  // namespace pcgk::dataorg
