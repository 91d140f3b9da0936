#pragma once

#include <span>
#include <string>

#include "pcgk/geometry/point_cloud.hpp"
#include "pcgk/render/image.hpp"

namespace pcgk::metrics {

using render::ImageGrid;

/// Mean squared difference. Throws ShapeError on a shape mismatch.
double mse(const ImageGrid& a, const ImageGrid& b);
/// 10 log10(1 / mse) for [0,1] images; +infinity when mse = 0.
double psnr_from_mse(double mse);
double psnr(const ImageGrid& a, const ImageGrid& b);

inline constexpr std::size_t kSsimWindow = 7;
/// Mean SSIM over all 7x7 windows (stride 1, uniform weights, population
/// statistics), C1 = 0.01^2, C2 = 0.03^2. Channels are averaged.
/// Throws ShapeError if an image side is below the window.
double ssim(const ImageGrid& a, const ImageGrid& b);

/// 2 I(A;B) / (H(A) + H(B)) over a joint histogram of equal-width bins on [0,1].
/// Returns 0 when both entropies vanish. Throws ConfigError when bins < 2.
double nmi(const ImageGrid& a, const ImageGrid& b, std::size_t bins = 64);

/// Squared-distance Chamfer between two point sets (metric form, no autodiff).
double chamfer_distance(std::span<const geometry::Vec3> a, std::span<const geometry::Vec3> b);

/// "inf" for infinite values, shortest round-trip decimal otherwise.
std::string format_metric(double x);

}  // namespace pcgk::metrics
