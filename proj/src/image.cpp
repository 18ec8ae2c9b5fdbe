#include "softbokeh/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace softbokeh {

PlanarImage::PlanarImage(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("PlanarImage: width and height must be positive");
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("PlanarImage: channels must be 1 or 3");
    data_.assign(plane_size() * static_cast<std::size_t>(channels), fill);
}

bool PlanarImage::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

float PlanarImage::min_value() const noexcept {
    return *std::min_element(data_.begin(), data_.end());
}

float PlanarImage::max_value() const noexcept {
    return *std::max_element(data_.begin(), data_.end());
}

PlanarImage PlanarImage::channel(int c) const {
    if (c < 0 || c >= channels_)
        throw std::out_of_range("PlanarImage::channel: index out of range");
    PlanarImage out(width_, height_, 1);
    std::copy(plane(c).begin(), plane(c).end(), out.plane(0).begin());
    return out;
}

Kernel2D Kernel2D::identity() {
    return Kernel2D(1, {1.0}, true);
}

Kernel2D Kernel2D::from_taps(int size, std::vector<double> taps, bool normalize) {
    if (size <= 0 || size % 2 == 0)
        throw std::invalid_argument("Kernel2D: size must be odd and positive");
    if (taps.size() != static_cast<std::size_t>(size) * static_cast<std::size_t>(size))
        throw std::invalid_argument("Kernel2D: tap count does not match size");
    for (double t : taps) {
        if (!(t >= 0.0) || !std::isfinite(t))
            throw std::invalid_argument("Kernel2D: taps must be finite and non-negative");
    }
    if (normalize) {
        const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
        if (total <= 0.0)
            throw std::invalid_argument("Kernel2D: cannot normalize an all-zero kernel");
        for (double& t : taps) t /= total;
    }
    return Kernel2D(size, std::move(taps), normalize);
}

double Kernel2D::sum() const noexcept {
    return std::accumulate(taps_.begin(), taps_.end(), 0.0);
}

void require_same_size(const PlanarImage& a, const PlanarImage& b, const char* what) {
    if (!a.same_size(b))
        throw std::invalid_argument(std::string(what) + ": image dimensions differ");
}

void require_same_shape(const PlanarImage& a, const PlanarImage& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": image shapes differ");
}

}  // namespace softbokeh
