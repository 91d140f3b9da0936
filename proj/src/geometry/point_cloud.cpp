#include "pcgk/geometry/point_cloud.hpp"

#include <algorithm>
#include <numbers>

#include "pcgk/common/error.hpp"

namespace pcgk::geometry {

namespace {

double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

}  // namespace

CameraPose::CameraPose(double azimuth, double elevation, double distance) {
    if (!std::isfinite(azimuth) || !std::isfinite(elevation))
        throw GeometryError("camera pose: angles must be finite");
    if (!(distance > 0.0) || !std::isfinite(distance))
        throw GeometryError("camera pose: distance must be positive, got " + std::to_string(distance));
    azimuth_ = wrap_angle(azimuth);
    elevation_ = wrap_angle(elevation);
    distance_ = distance;
}

Vec3 camera_position(const CameraPose& pose) {
    const double ce = std::cos(pose.elevation());
    return {pose.distance() * ce * std::cos(pose.azimuth()), pose.distance() * ce * std::sin(pose.azimuth()),
            pose.distance() * std::sin(pose.elevation())};
}

Vec3 centroid(std::span<const Vec3> points) {
    Vec3 c;
    for (const auto& p : points) c += p;
    return points.empty() ? c : c / static_cast<double>(points.size());
}

PointCloud normalize_cloud(const PointCloud& cloud, double radius) {
    if (cloud.empty()) throw GeometryError("normalize_cloud: empty cloud");
    if (!(radius > 0.0)) throw GeometryError("normalize_cloud: radius must be positive");
    const Vec3 c = centroid(cloud.points);
    PointCloud out{std::vector<Vec3>(cloud.size()), cloud.label};
    double max_norm = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out.points[i] = cloud.points[i] - c;
        max_norm = std::max(max_norm, norm(out.points[i]));
    }
    // Rounding in the centroid leaves residue on clouds of identical points.
    const double scale = std::max({1.0, std::fabs(c.x), std::fabs(c.y), std::fabs(c.z)});
    if (max_norm <= 1e-12 * scale) {
        std::fill(out.points.begin(), out.points.end(), Vec3{});
        return out;
    }
    const double s = radius / max_norm;
    for (auto& p : out.points) p = p * s;
    return out;
}

}  // namespace pcgk::geometry
