#include "pcgk/geometry/hpr.hpp"

#include <algorithm>

#include "pcgk/common/error.hpp"

namespace pcgk::geometry {

SphericalFlip spherical_flip(std::span<const Vec3> points, const Vec3& camera, double gamma) {
    if (!(gamma > 1.0)) throw GeometryError("spherical_flip: gamma must exceed 1, got " + std::to_string(gamma));
    SphericalFlip out;
    out.points.resize(points.size());
    std::vector<double> norms(points.size());
    double max_norm = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        out.points[i] = points[i] - camera;
        norms[i] = norm(out.points[i]);
        if (norms[i] <= 1e-9)
            throw GeometryError("spherical_flip: point " + std::to_string(i) + " coincides with the camera");
        max_norm = std::max(max_norm, norms[i]);
    }
    out.radius = gamma * max_norm;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3& q = out.points[i];
        out.points[i] = q + q * (2.0 * (out.radius - norms[i]) / norms[i]);
    }
    return out;
}

bool is_exterior(std::span<const Vec3> points, const Vec3& p) {
    const Hull3D hull = convex_hull_3d(points);
    const double eps = hull_tolerance(points);
    return std::any_of(hull.faces.begin(), hull.faces.end(),
                       [&](const auto& f) { return face_distance(points, f, p) > eps; });
}

VisibilitySplit hidden_point_removal(std::span<const Vec3> points, const Vec3& camera, double gamma) {
    if (!is_exterior(points, camera)) throw GeometryError("hidden_point_removal: camera not exterior");
    SphericalFlip flip = spherical_flip(points, camera, gamma);
    const std::size_t n = points.size();
    flip.points.push_back(Vec3{});  // the camera, at the origin of the flipped frame
    const Hull3D hull = convex_hull_3d(flip.points);

    std::vector<bool> on_hull(n, false);
    for (auto v : hull.vertices)
        if (v < n) on_hull[v] = true;
    VisibilitySplit split;
    for (std::size_t i = 0; i < n; ++i) (on_hull[i] ? split.visible : split.hidden).push_back(i);
    return split;
}

VisibilitySplit hidden_point_removal(const PointCloud& cloud, const CameraPose& pose, double gamma) {
    return hidden_point_removal(cloud.points, camera_position(pose), gamma);
}

}  // namespace pcgk::geometry
