#include "pcgk/render/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pcgk/common/error.hpp"

namespace pcgk::render {

using geometry::Vec3;

RenderMode parse_render_mode(const std::string& s) {
    if (s == "depth") return RenderMode::depth;
    if (s == "silhouette") return RenderMode::silhouette;
    throw ConfigError("unknown render mode '" + s + "' (expected depth or silhouette)");
}

std::string to_string(RenderMode mode) { return mode == RenderMode::depth ? "depth" : "silhouette"; }

std::vector<Projection> project_points(std::span<const Vec3> points, const geometry::CameraPose& pose,
                                       std::size_t width, std::size_t height, double fov_deg) {
    const Vec3 eye = geometry::camera_position(pose);
    const Vec3 forward = eye * (-1.0 / geometry::norm(eye));
    Vec3 up{0, 0, 1};
    if (geometry::norm(geometry::cross(forward, up)) < 1e-9) up = {1, 0, 0};
    Vec3 right = geometry::cross(forward, up);
    right = right / geometry::norm(right);
    const Vec3 cam_up = geometry::cross(right, forward);

    const double focal = 0.5 * static_cast<double>(width) / std::tan(0.5 * fov_deg * std::numbers::pi / 180.0);
    const double cu = 0.5 * static_cast<double>(width), cv = 0.5 * static_cast<double>(height);
    std::vector<Projection> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3 rel = points[i] - eye;
        const double z = geometry::dot(rel, forward);
        if (z <= 1e-9) continue;
        out.push_back({cu + focal * geometry::dot(rel, right) / z, cv - focal * geometry::dot(rel, cam_up) / z, z, i});
    }
    return out;
}

ImageGrid rasterize(std::span<const Vec3> points, const geometry::CameraPose& pose, std::size_t size, RenderMode mode,
                    double fov_deg) {
    if (size < 8) throw ShapeError("rasterize: size must be >= 8, got " + std::to_string(size));
    const auto n = static_cast<long>(size);
    std::vector<double> nearest(size * size, std::numeric_limits<double>::infinity());
    for (const auto& p : project_points(points, pose, size, size, fov_deg)) {
        // The 2x2 block of pixels whose centers surround the projection.
        const long c0 = static_cast<long>(std::floor(p.u - 0.5));
        const long r0 = static_cast<long>(std::floor(p.v - 0.5));
        for (long r = r0; r <= r0 + 1; ++r)
            for (long c = c0; c <= c0 + 1; ++c) {
                if (r < 0 || c < 0 || r >= n || c >= n) continue;
                double& slot = nearest[static_cast<std::size_t>(r * n + c)];
                slot = std::min(slot, p.depth);
            }
    }
    ImageGrid img(size, size, 1);
    const double near = pose.distance() - 0.5;
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) {
            const double d = nearest[r * size + c];
            if (!std::isfinite(d)) continue;
            img.set(r, c, mode == RenderMode::silhouette ? 1.0 : 1.0 - std::clamp(d - near, 0.0, 1.0));
        }
    return img;
}

std::vector<ImageGrid> image_pyramid(const ImageGrid& img, std::size_t scales) {
    if (scales == 0) throw ShapeError("image_pyramid: scales must be >= 1");
    const std::size_t div = std::size_t{1} << (scales - 1);
    if (img.height() % div != 0 || img.width() % div != 0)
        throw ShapeError("image_pyramid: size " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                         " not divisible by " + std::to_string(div));
    std::vector<ImageGrid> levels{img};
    for (std::size_t s = 1; s < scales; ++s) {
        const ImageGrid& prev = levels.back();
        const std::size_t h = prev.height() / 2, w = prev.width() / 2, ch = prev.channels();
        ImageGrid next(h, w, ch);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c)
                for (std::size_t k = 0; k < ch; ++k)
                    next.set(r, c,
                             0.25 * (prev.at(2 * r, 2 * c, k) + prev.at(2 * r, 2 * c + 1, k) +
                                     prev.at(2 * r + 1, 2 * c, k) + prev.at(2 * r + 1, 2 * c + 1, k)),
                             k);
        levels.push_back(std::move(next));
    }
    return levels;
}

}  // namespace pcgk::render
