#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcgk/common/rng.hpp"
#include "pcgk/geometry/point_cloud.hpp"
#include "pcgk/render/image.hpp"
#include "pcgk/render/raster.hpp"

namespace pcgk::dataorg {

/// What the model sees: the HPR view, the view plus 2 or 8 extra hidden-side
/// patches, or the union of two views.
enum class InputMode { view1, view1_p2, view1_p8, view2 };

InputMode parse_input_mode(const std::string& s);
std::string to_string(InputMode mode);

inline constexpr std::size_t kPoseRetryBudget = 8;

/// Azimuth and elevation uniform in [0, 2pi), distance 1.
geometry::CameraPose sample_pose(Rng& rng);

struct PatchParams {
    std::size_t v = 16, h = 16, k = 16, k_v = 16;
    double gamma = 3.0;
    InputMode input_mode = InputMode::view1;
};

/// Patch tensors stored flat, row-major. Patch coordinates are center-relative.
struct PatchSet {
    std::size_t v = 0, h = 0, k = 0, k_v = 0;
    std::vector<geometry::Vec3> visible_patches;  // v * k_v
    std::vector<geometry::Vec3> visible_centers;  // v
    std::vector<geometry::Vec3> hidden_centers;   // h
    std::vector<geometry::Vec3> target_patches;   // h * k

    // Provenance in the source cloud.
    std::vector<std::size_t> visible_indices, hidden_indices;
    std::vector<std::size_t> visible_patch_indices, target_patch_indices;
    geometry::CameraPose pose;  // pose that produced the split
    std::size_t attempts = 1;   // poses tried, including the successful one
};

/// Patches from an explicit visible/hidden split: visible centers are FPS over
/// the visible points, each grouping its k_v nearest visible points; hidden
/// centers are FPS over the hidden points, each targeting its k nearest points of
/// the complete cloud. Throws DataError when a side is too small.
PatchSet patches_from_split(const geometry::PointCloud& cloud, std::vector<std::size_t> visible,
                            std::size_t v, std::size_t h, std::size_t k, std::size_t k_v, std::uint64_t seed);

/// HPR split at `pose` (augmented per input_mode), then patches_from_split. A pose
/// that leaves fewer than v visible or h hidden points is replaced by a fresh
/// draw; after kPoseRetryBudget poses a DataError naming `cloud_id` is thrown.
PatchSet build_patches(const geometry::PointCloud& cloud, const geometry::CameraPose& pose, const PatchParams& params,
                       std::uint64_t seed, std::size_t cloud_id = 0);

struct SampleParams {
    PatchParams patch;
    std::size_t img_size = 16;
    render::RenderMode render_mode = render::RenderMode::depth;
    double fov_deg = render::kDefaultFovDeg;
};

struct Sample {
    geometry::PointCloud cloud;
    geometry::CameraPose input_pose, align_pose, target_pose;
    PatchSet patches;
    render::ImageGrid align_image, target_image;
};

/// Draws input, align and target poses independently from `seed`, splits and
/// patches the cloud, and renders the complete cloud at the align and target poses.
Sample build_sample(const geometry::PointCloud& cloud, const SampleParams& params, std::uint64_t seed,
                    std::size_t cloud_id = 0);

}  // namespace pcgk::dataorg
