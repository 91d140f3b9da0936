#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace pcgk::geometry {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    bool operator==(const Vec3&) const = default;

    double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

struct PointCloud {
    std::vector<Vec3> points;
    std::optional<int> label;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Viewpoint on a sphere around the origin. Angles are reduced to [0, 2pi).
class CameraPose {
public:
    CameraPose() = default;
    /// Throws GeometryError if distance <= 0 or an angle is not finite.
    CameraPose(double azimuth, double elevation, double distance);

    double azimuth() const { return azimuth_; }
    double elevation() const { return elevation_; }
    double distance() const { return distance_; }

    bool operator==(const CameraPose&) const = default;

private:
    double azimuth_ = 0.0;
    double elevation_ = 0.0;
    double distance_ = 1.0;
};

/// (rho cos(el) cos(az), rho cos(el) sin(az), rho sin(el))
Vec3 camera_position(const CameraPose& pose);

inline constexpr double kDefaultCloudRadius = 0.35;

/// Centers the cloud and scales it so the farthest point sits at `radius`.
/// Clouds of identical points map to all zeros. Throws GeometryError when empty.
PointCloud normalize_cloud(const PointCloud& cloud, double radius = kDefaultCloudRadius);

Vec3 centroid(std::span<const Vec3> points);

}  // namespace pcgk::geometry
