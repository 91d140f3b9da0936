#pragma once

#include <cstddef>
#include <vector>

namespace pcgk::render {

/// Row-major H x W x C intensities in [0,1].
class ImageGrid {
public:
    ImageGrid() = default;
    /// All-zero image. Throws ShapeError on zero extents or channels not in {1,3}.
    ImageGrid(std::size_t height, std::size_t width, std::size_t channels = 1);
    /// Throws ShapeError on a size mismatch and DataError on values outside [0,1].
    ImageGrid(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }

    double at(std::size_t row, std::size_t col, std::size_t ch = 0) const {
        return data_[(row * width_ + col) * channels_ + ch];
    }
    /// Values must stay in [0,1]; `set` clamps.
    void set(std::size_t row, std::size_t col, double v, std::size_t ch = 0);

    const std::vector<double>& data() const { return data_; }
    bool same_shape(const ImageGrid& o) const {
        return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
    }
    double mean() const;

private:
    std::size_t height_ = 0, width_ = 0, channels_ = 1;
    std::vector<double> data_;
};

}  // namespace pcgk::render
