#include "softbokeh/radiance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace softbokeh {

void RadianceParams::validate() const {
    if (!(alpha >= 1.0)) throw std::invalid_argument("RadianceParams: alpha must be >= 1");
    if (!(beta >= 1.0)) throw std::invalid_argument("RadianceParams: beta must be >= 1");
    if (!(bright_threshold > 0.0 && bright_threshold < 1.0))
        throw std::invalid_argument("RadianceParams: bright_threshold must be in (0,1)");
    if (base.kind == BaseMap::Kind::gamma && !(base.exponent > 0.0))
        throw std::invalid_argument("RadianceParams: gamma exponent must be positive");
}

PlanarImage bright_mask(const PlanarImage& image, double threshold, bool any_channel) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("bright_mask: threshold must be in (0,1)");
    PlanarImage mask(image.width(), image.height(), image.channels());
    for (int c = 0; c < image.channels(); ++c) {
        const auto src = image.plane(c);
        auto dst = mask.plane(c);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<double>(src[i]) >= threshold ? 1.0f : 0.0f;
    }
    if (any_channel && image.channels() > 1) {
        for (std::size_t i = 0; i < image.plane_size(); ++i) {
            float any = 0.0f;
            for (int c = 0; c < image.channels(); ++c) any = std::max(any, mask.plane(c)[i]);
            for (int c = 0; c < image.channels(); ++c) mask.plane(c)[i] = any;
        }
    }
    return mask;
}

RadianceMap virtualize(const PlanarImage& image, const RadianceParams& params) {
    params.validate();
    if (image.channels() != 3) throw std::invalid_argument("virtualize: image must have 3 channels");

    const PlanarImage mask = bright_mask(image, params.bright_threshold, params.any_channel);
    RadianceMap out{PlanarImage(image.width(), image.height(), 3)};
    for (std::size_t i = 0; i < image.plane_size(); ++i) {
        double luminance = 0.0;
        if (params.base.kind == BaseMap::Kind::luminance) {
            luminance = 0.2126 * image.plane(0)[i] + 0.7152 * image.plane(1)[i] + 0.0722 * image.plane(2)[i];
        }
        for (int c = 0; c < 3; ++c) {
            const double v = std::clamp(static_cast<double>(image.plane(c)[i]), 0.0, 1.0);
            double r = 0.0;
            if (mask.plane(c)[i] > 0.5f) {
                r = params.alpha * std::pow(v, params.beta);
            } else {
                switch (params.base.kind) {
                    case BaseMap::Kind::identity: r = v; break;
                    case BaseMap::Kind::gamma: r = std::pow(v, params.base.exponent); break;
                    case BaseMap::Kind::luminance: r = std::clamp(luminance, 0.0, 1.0); break;
                }
            }
            out.raster.plane(c)[i] = static_cast<float>(r);
        }
    }
    return out;
}

BaseMap parse_base_map(const std::string& spec) {
    if (spec == "identity") return BaseMap::identity();
    if (spec == "luminance") return BaseMap::luminance();
    if (spec.rfind("gamma", 0) == 0) {
        // "gamma" or "gamma:2.2"
        double g = 2.2;
        const auto colon = spec.find(':');
        if (colon != std::string::npos) {
            try {
                g = std::stod(spec.substr(colon + 1));
            } catch (const std::exception&) {
                throw std::invalid_argument("bad gamma exponent in '" + spec + "'");
            }
        }
        return BaseMap::gamma(g);
    }
    throw std::invalid_argument("unknown base map '" + spec + "' (identity, luminance, gamma[:g])");
}

std::string to_string(const BaseMap& base) {
    switch (base.kind) {
        case BaseMap::Kind::identity: return "identity";
        case BaseMap::Kind::luminance: return "luminance";
        case BaseMap::Kind::gamma: {
            std::ostringstream s;
            s << "gamma:" << base.exponent;
            return s.str();
        }
    }
    return "identity";
}

}  // namespace softbokeh
