#pragma once

#include <span>
#include <string>
#include <vector>

#include "pcgk/geometry/point_cloud.hpp"
#include "pcgk/render/image.hpp"

namespace pcgk::render {

enum class RenderMode { silhouette, depth };

RenderMode parse_render_mode(const std::string& s);
std::string to_string(RenderMode mode);

inline constexpr double kDefaultFovDeg = 50.0;

struct Projection {
    double u = 0.0, v = 0.0;  // pixel coordinates, pixel (r,c) covers [c,c+1) x [r,r+1)
    double depth = 0.0;       // distance along the optical axis
    std::size_t index = 0;    // source point
};

/// Pinhole projection with the camera at camera_position(pose) looking at the
/// origin, up = +z (+x when the view is parallel to z). Points behind the camera are dropped.
std::vector<Projection> project_points(std::span<const geometry::Vec3> points, const geometry::CameraPose& pose,
                                       std::size_t width, std::size_t height, double fov_deg = kDefaultFovDeg);

/// Point splatting with a 2x2 footprint. Depth mode stores 1 - normalized nearest
/// depth over [distance - 0.5, distance + 0.5]; background is 0 in both modes.
ImageGrid rasterize(std::span<const geometry::Vec3> points, const geometry::CameraPose& pose, std::size_t size,
                    RenderMode mode, double fov_deg = kDefaultFovDeg);

/// Level 0 is the input, level s the 2x2 mean pool of level s-1.
std::vector<ImageGrid> image_pyramid(const ImageGrid& img, std::size_t scales);

}  // namespace pcgk::render
