#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pcgk/common/rng.hpp"
#include "pcgk/geometry/point_cloud.hpp"

namespace pcgk::dataorg {

enum class ShapeClass : int { sphere = 0, box = 1, torus = 2, cylinder = 3 };
inline constexpr int kNumShapeClasses = 4;

std::string to_string(ShapeClass c);

// Raw surface samplers, before rotation and normalization.
std::vector<geometry::Vec3> sample_sphere(Rng& rng, std::size_t n, double radius = 1.0);
std::vector<geometry::Vec3> sample_box(Rng& rng, std::size_t n, const std::array<double, 3>& half_extent);
std::vector<geometry::Vec3> sample_torus(Rng& rng, std::size_t n, double major = 0.25, double minor = 0.1);
/// Side wall plus both caps, area-weighted.
std::vector<geometry::Vec3> sample_cylinder(Rng& rng, std::size_t n, double radius, double half_height);

/// Uniformly random rotation (unit quaternion from four normal draws).
std::array<double, 9> random_rotation(Rng& rng);
std::vector<geometry::Vec3> rotate(const std::vector<geometry::Vec3>& pts, const std::array<double, 9>& r);

/// One shape: sampled, randomly rotated and normalized, labelled with its class.
geometry::PointCloud make_shape(ShapeClass c, std::size_t n_points, Rng& rng);

/// n_per_class clouds of each class, class-major order. Each cloud draws from its
/// own stream derived from (seed, class, index), so the output is bit-reproducible.
std::vector<geometry::PointCloud> make_synthetic_dataset(std::size_t n_per_class, std::size_t n_points,
                                                         std::uint64_t seed);

}  // namespace pcgk::dataorg
