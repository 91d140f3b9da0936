#pragma once

#include <array>
#include <span>
#include <vector>

#include "pcgk/geometry/point_cloud.hpp"

namespace pcgk::geometry {

struct Hull3D {
    /// Sorted indices of the extreme points.
    std::vector<std::size_t> vertices;
    /// Triangles, counter-clockwise seen from outside.
    std::vector<std::array<std::size_t, 3>> faces;
};

/// Plane-side tolerance: 1e-9 times the bounding-box diagonal.
double hull_tolerance(std::span<const Vec3> points);

/// Incremental quickhull; each supporting plane is then re-triangulated over the
/// strict planar hull of the points on it, so exactly the extreme points become
/// vertices.
/// Throws GeometryError for fewer than 4 points or a coplanar set.
Hull3D convex_hull_3d(std::span<const Vec3> points);

/// Signed distance of `p` to the plane of `face` (positive outside).
double face_distance(std::span<const Vec3> points, const std::array<std::size_t, 3>& face, const Vec3& p);

}  // namespace pcgk::geometry
