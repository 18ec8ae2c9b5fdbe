#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace softbokeh {

/// Multi-channel floating-point raster stored as one contiguous plane per
/// channel. Photographic content is nominally in [0,1]; radiance planes may
/// exceed 1.
class PlanarImage {
public:
    PlanarImage(int width, int height, int channels, float fill = 0.0f);

    static PlanarImage constant(int width, int height, int channels, float value) {
        return PlanarImage(width, height, channels, value);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t plane_size() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    std::span<float> plane(int c) noexcept {
        return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
    }
    std::span<const float> plane(int c) const noexcept {
        return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
    }

    float& at(int c, int x, int y) noexcept { return plane(c)[index(x, y)]; }
    float at(int c, int x, int y) const noexcept { return plane(c)[index(x, y)]; }

    std::span<float> samples() noexcept { return data_; }
    std::span<const float> samples() const noexcept { return data_; }

    bool same_shape(const PlanarImage& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }
    bool same_size(const PlanarImage& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool all_finite() const noexcept;
    float min_value() const noexcept;
    float max_value() const noexcept;

    /// Single-channel copy of channel `c`.
    PlanarImage channel(int c) const;

    bool operator==(const PlanarImage& other) const = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

/// Square, odd-sized, non-negative filter. Taps are stored row-major with the
/// center at (radius, radius).
class Kernel2D {
public:
    static Kernel2D identity();
    /// Builds a kernel from raw taps; when `normalize` is set the taps are
    /// divided by their sum.
    static Kernel2D from_taps(int size, std::vector<double> taps, bool normalize);

    int size() const noexcept { return size_; }
    int radius() const noexcept { return size_ / 2; }
    bool normalized() const noexcept { return normalized_; }
    std::span<const double> taps() const noexcept { return taps_; }

    /// Tap at offset (dx, dy) from the center, both in [-radius, radius].
    double tap(int dx, int dy) const noexcept {
        return taps_[static_cast<std::size_t>(dy + radius()) * static_cast<std::size_t>(size_) +
                     static_cast<std::size_t>(dx + radius())];
    }

    double sum() const noexcept;
    bool is_identity() const noexcept { return size_ == 1; }

private:
    Kernel2D(int size, std::vector<double> taps, bool normalized)
        : size_(size), taps_(std::move(taps)), normalized_(normalized) {}

    int size_ = 1;
    std::vector<double> taps_{1.0};
    bool normalized_ = true;
};

/// Throws std::invalid_argument unless both images have equal width/height.
void require_same_size(const PlanarImage& a, const PlanarImage& b, const char* what);
/// Throws std::invalid_argument unless both images have identical shape.
void require_same_shape(const PlanarImage& a, const PlanarImage& b, const char* what);

}  // namespace softbokeh
