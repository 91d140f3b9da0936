#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcgk/geometry/point_cloud.hpp"

namespace pcgk::geometry {

/// Greedy farthest point sampling. The first pick is `seed mod n`; every later
/// pick maximizes the distance to the chosen set, ties to the lowest index.
std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3> points, std::size_t m, std::uint64_t seed);

/// k nearest neighbours of `query`, ascending distance, ties to the lowest index.
std::vector<std::size_t> knn(const Vec3& query, std::span<const Vec3> points, std::size_t k);

}  // namespace pcgk::geometry
