#include "softbokeh/defocus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "softbokeh/imageops.hpp"

namespace softbokeh {

SignedDefocus signed_defocus(const PlanarImage& disparity, double focal) {
    if (disparity.channels() != 1) throw std::invalid_argument("signed_defocus: disparity must be single-channel");
    if (!(focal >= 0.0 && focal <= 1.0)) throw std::invalid_argument("signed_defocus: focal must be in [0,1]");
    for (float v : disparity.samples()) {
        if (!(v >= 0.0f && v <= 1.0f)) throw std::invalid_argument("signed_defocus: disparity must lie in [0,1]");
    }
    SignedDefocus sd{PlanarImage(disparity.width(), disparity.height(), 1), focal};
    const auto src = disparity.plane(0);
    auto dst = sd.raster.plane(0);
    // Subtract in float so a disparity sample equal to float(focal) yields exactly 0.
    const float f = static_cast<float>(focal);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] - f;
    return sd;
}

DefocusMap defocus_magnitude(const SignedDefocus& sd, DefocusNormalization mode) {
    DefocusMap out{PlanarImage(sd.raster.width(), sd.raster.height(), 1)};
    const auto src = sd.raster.plane(0);
    auto dst = out.raster.plane(0);

    double divisor = 1.0;
    if (mode == DefocusNormalization::fixed_range) {
        divisor = std::max(sd.focal, 1.0 - sd.focal);
    } else if (mode == DefocusNormalization::per_image_max) {
        double peak = 0.0;
        for (float v : src) peak = std::max(peak, std::abs(static_cast<double>(v)));
        divisor = peak > 0.0 ? peak : 1.0;
    }
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = static_cast<float>(std::clamp(std::abs(static_cast<double>(src[i])) / divisor, 0.0, 1.0));
    return out;
}

PlanarImage binary_mask(const DefocusMap& defocus, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("binary_mask: theta must be in (0,1)");
    PlanarImage mask(defocus.raster.width(), defocus.raster.height(), 1);
    const auto src = defocus.raster.plane(0);
    auto dst = mask.plane(0);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<double>(src[i]) < theta ? 1.0f : 0.0f;
    return mask;
}

double layer_mask_value(double defocus, int layer, int layers, double gamma) {
    const double z = gamma * (1.0 / layers - std::abs(defocus - static_cast<double>(layer) / layers));
    return 1.0 / (1.0 + std::exp(-2.0 * z));
}

std::vector<LayerMask> layer_masks(const DefocusMap& defocus, int layers, double gamma) {
    if (layers < 2) throw std::invalid_argument("layer_masks: need at least 2 layers");
    if (!(gamma > 0.0)) throw std::invalid_argument("layer_masks: gamma must be positive");
    constexpr double lo = std::numeric_limits<float>::min();
    constexpr double hi = 1.0 - std::numeric_limits<float>::epsilon() / 2.0;

    std::vector<LayerMask> masks;
    masks.reserve(static_cast<std::size_t>(layers));
    const auto d = defocus.raster.plane(0);
    for (int l = 1; l <= layers; ++l) {
        LayerMask m{l, PlanarImage(defocus.raster.width(), defocus.raster.height(), 1)};
        auto dst = m.raster.plane(0);
        for (std::size_t i = 0; i < d.size(); ++i)
            dst[i] = static_cast<float>(std::clamp(layer_mask_value(d[i], l, layers, gamma), lo, hi));
        masks.push_back(std::move(m));
    }
    return masks;
}

int nearest_layer(double defocus, int layers) {
    int best = 1;
    double best_distance = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= layers; ++l) {
        const double distance = std::abs(defocus - static_cast<double>(l) / layers);
        if (distance < best_distance) {
            best = l;
            best_distance = distance;
        }
    }
    return best;
}

int dominant_layer(double defocus, int layers, double gamma) {
    int best = layers;
    double best_weight = -1.0;
    double occlusion = 1.0;
    for (int l = layers; l >= 1; --l) {
        const double m = layer_mask_value(defocus, l, layers, gamma);
        const double weight = m * occlusion;
        if (weight > best_weight) {
            best = l;
            best_weight = weight;
        }
        occlusion *= 1.0 - m;
    }
    return best;
}

double defocus_smoothness(const DefocusMap& defocus, const PlanarImage& image, int scales) {
    if (scales < 1) throw std::invalid_argument("defocus_smoothness: scales must be >= 1");
    require_same_size(defocus.raster, image, "defocus_smoothness");

    PlanarImage d = defocus.raster;
    PlanarImage img = image;
    double total = 0.0;
    for (int s = 0; s < scales; ++s) {
        if (s > 0) {
            const int w = std::max(1, d.width() / 2);
            const int h = std::max(1, d.height() / 2);
            d = resize_bilinear(d, w, h);
            img = resize_bilinear(img, w, h);
        }
        const auto [dx, dy] = gradients_xy(d);
        const auto [ix, iy] = gradients_xy(img);
        double sum = 0.0;
        for (int y = 0; y < d.height(); ++y) {
            for (int x = 0; x < d.width(); ++x) {
                double nx = 0.0;
                double ny = 0.0;
                for (int c = 0; c < img.channels(); ++c) {
                    nx += std::abs(static_cast<double>(ix.at(c, x, y)));
                    ny += std::abs(static_cast<double>(iy.at(c, x, y)));
                }
                sum += std::abs(static_cast<double>(dx.at(0, x, y))) * std::exp(-nx) +
                       std::abs(static_cast<double>(dy.at(0, x, y))) * std::exp(-ny);
            }
        }
        total += sum / static_cast<double>(d.plane_size());
    }
    return total / scales;
}

DefocusNormalization parse_normalization(const std::string& name) {
    if (name == "fixed_range") return DefocusNormalization::fixed_range;
    if (name == "per_image_max") return DefocusNormalization::per_image_max;
    if (name == "none") return DefocusNormalization::none;
    throw std::invalid_argument("unknown normalization '" + name + "'");
}

std::string to_string(DefocusNormalization mode) {
    switch (mode) {
        case DefocusNormalization::fixed_range: return "fixed_range";
        case DefocusNormalization::per_image_max: return "per_image_max";
        case DefocusNormalization::none: return "none";
    }
    return "fixed_range";
}

}  // namespace softbokeh
