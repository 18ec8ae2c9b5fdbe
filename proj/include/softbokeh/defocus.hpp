#pragma once

#include <string>
#include <vector>

#include "softbokeh/image.hpp"

namespace softbokeh {

/// Disparity minus focal disparity. Positive where the scene is nearer than
/// the focal plane.
struct SignedDefocus {
    PlanarImage raster;
    double focal = 0.0;
};

/// Per-pixel blur amount in [0,1]; 0 is in focus.
struct DefocusMap {
    PlanarImage raster;
};

struct LayerMask {
    int layer = 1;  ///< 1..L
    PlanarImage raster;
};

enum class DefocusNormalization {
    fixed_range,    ///< |d - f| / max(f, 1 - f)
    per_image_max,  ///< |d - f| / max over the image (all-zero stays zero)
    none,           ///< |d - f| clamped to [0,1]
};

/// Throws std::invalid_argument for multi-channel disparity, samples outside
/// [0,1], or a focal value outside [0,1].
SignedDefocus signed_defocus(const PlanarImage& disparity, double focal);

DefocusMap defocus_magnitude(const SignedDefocus& sd, DefocusNormalization mode = DefocusNormalization::fixed_range);

/// Fusion seed mask: 1 on the sharp region (D < theta), 0 elsewhere.
PlanarImage binary_mask(const DefocusMap& defocus, double theta);

/// 1/2 + 1/2 tanh(gamma (1/L - |D - l/L|)), evaluated in the logistic form so
/// far layers keep a tiny positive weight instead of rounding to zero.
double layer_mask_value(double defocus, int layer, int layers, double gamma);

/// Samples are clamped into [FLT_MIN, 1 - FLT_EPSILON/2] so every mask stays
/// strictly inside (0,1) after float storage.
std::vector<LayerMask> layer_masks(const DefocusMap& defocus, int layers, double gamma);

/// Layer whose center l/L is nearest to `defocus`; ties go to the lower index.
int nearest_layer(double defocus, int layers);

/// Layer with the largest compositing weight M_l * prod_{j>l}(1 - M_j) at
/// `defocus`. Layer l owns the band ((l-1)/L, l/L): at its own center the
/// next layer up has mask 1/2 and is composited in front.
int dominant_layer(double defocus, int layers, double gamma);

/// Edge-aware pyramid smoothness of D against image I over `scales` levels,
/// each level a 2x bilinear downsample of the previous one.
double defocus_smoothness(const DefocusMap& defocus, const PlanarImage& image, int scales);

DefocusNormalization parse_normalization(const std::string& name);
std::string to_string(DefocusNormalization mode);

}  // namespace softbokeh
