#include "pcgk/render/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcgk/common/error.hpp"

namespace pcgk::render {

ImageGrid::ImageGrid(std::size_t height, std::size_t width, std::size_t channels)
    : ImageGrid(height, width, channels, std::vector<double>(height * width * channels, 0.0)) {}

ImageGrid::ImageGrid(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (height == 0 || width == 0) throw ShapeError("image: zero extent");
    if (channels != 1 && channels != 3) throw ShapeError("image: channels must be 1 or 3, got " + std::to_string(channels));
    if (data_.size() != height * width * channels)
        throw ShapeError("image: expected " + std::to_string(height * width * channels) + " values, got " +
                         std::to_string(data_.size()));
    for (std::size_t i = 0; i < data_.size(); ++i)
        if (!(data_[i] >= 0.0 && data_[i] <= 1.0))
            throw DataError("image: value " + std::to_string(data_[i]) + " at index " + std::to_string(i) +
                            " outside [0,1]");
}

void ImageGrid::set(std::size_t row, std::size_t col, double v, std::size_t ch) {
    data_[(row * width_ + col) * channels_ + ch] = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
}

double ImageGrid::mean() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return data_.empty() ? 0.0 : s / static_cast<double>(data_.size());
}

}  // namespace pcgk::render
