#pragma once

#include <span>
#include <vector>

#include "pcgk/geometry/hull.hpp"
#include "pcgk/geometry/point_cloud.hpp"

namespace pcgk::geometry {

inline constexpr double kDefaultFlipGamma = 3.0;

struct SphericalFlip {
    /// Flipped points, camera-centered.
    std::vector<Vec3> points;
    double radius = 0.0;
};

/// Spherical flip about the camera: with q = p - C and R = gamma * max|q|,
/// q' = q + 2 (R - |q|) q / |q|, so |q'| = 2R - |q| along the same ray.
/// Throws GeometryError if gamma <= 1 or a point coincides with the camera.
SphericalFlip spherical_flip(std::span<const Vec3> points, const Vec3& camera, double gamma);

struct VisibilitySplit {
    std::vector<std::size_t> visible;
    std::vector<std::size_t> hidden;
};

/// True if `p` lies strictly outside the convex hull of `points`.
bool is_exterior(std::span<const Vec3> points, const Vec3& p);

/// Hidden point removal: the visible points are those whose flipped images are
/// vertices of the hull of the flipped set plus the camera.
/// Throws GeometryError("camera not exterior") if the camera is inside the cloud's hull.
VisibilitySplit hidden_point_removal(const PointCloud& cloud, const CameraPose& pose,
                                     double gamma = kDefaultFlipGamma);
VisibilitySplit hidden_point_removal(std::span<const Vec3> points, const Vec3& camera,
                                     double gamma = kDefaultFlipGamma);

}  // namespace pcgk::geometry
