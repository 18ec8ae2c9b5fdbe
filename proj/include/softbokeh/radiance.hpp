#pragma once

#include <string>

#include "softbokeh/image.hpp"

namespace softbokeh {

/// Intensity-to-radiance mapping applied to pixels below the bright threshold.
struct BaseMap {
    enum class Kind { identity, gamma, luminance };
    Kind kind = Kind::identity;
    double exponent = 1.0;  ///< used by Kind::gamma

    static BaseMap identity() { return {}; }
    static BaseMap gamma(double g) { return {Kind::gamma, g}; }
    static BaseMap luminance() { return {Kind::luminance, 1.0}; }
};

struct RadianceParams {
    double alpha = 3.0;              ///< weight ceiling for bright pixels
    double beta = 5.0;               ///< exponent applied to bright channels
    double bright_threshold = 0.99;  ///< channel value at/above which the boost applies
    BaseMap base = BaseMap::identity();
    bool any_channel = false;        ///< boost all channels when any one is bright

    /// Throws std::invalid_argument unless alpha >= 1, beta >= 1 and the
    /// threshold lies in (0,1).
    void validate() const;
};

/// 3-channel radiance raster with values in [0, alpha].
struct RadianceMap {
    PlanarImage raster;
};

/// Indicator of value >= threshold, per channel (or broadcast from any
/// channel when `any_channel` is set). Same shape as `image`.
PlanarImage bright_mask(const PlanarImage& image, double threshold, bool any_channel = false);

/// Bright channels get alpha * I^beta, the rest get base(I).
RadianceMap virtualize(const PlanarImage& image, const RadianceParams& params);

BaseMap parse_base_map(const std::string& spec);
std::string to_string(const BaseMap& base);

}  // namespace softbokeh
