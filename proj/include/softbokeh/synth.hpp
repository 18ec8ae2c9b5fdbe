#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "softbokeh/image.hpp"
#include "softbokeh/render.hpp"

namespace softbokeh {

enum class SceneKind { flat, two_plane, ramp, highlights };
enum class SceneShape { disk, rect, half };

struct SceneRecipe {
    SceneKind kind = SceneKind::flat;
    double disparity = 0.5;   ///< flat
    double d_fg = 0.0;        ///< two_plane foreground
    double d_bg = 1.0;        ///< two_plane background
    SceneShape shape = SceneShape::disk;
    int highlight_count = 0;  ///< highlights
    double intensity = 1.0;   ///< highlight value, >= 0.99

    static SceneRecipe flat(double d);
    static SceneRecipe two_plane(double fg, double bg, SceneShape shape);
    static SceneRecipe ramp();
    static SceneRecipe highlights(int count, double intensity);

    /// Round-trips through parse_recipe.
    std::string describe() const;
};

/// Accepts "flat:D", "two_plane:FG:BG:SHAPE", "ramp", "highlights:N:I".
SceneRecipe parse_recipe(const std::string& text);
SceneShape parse_shape(const std::string& name);
std::string to_string(SceneShape shape);

struct SyntheticScene {
    PlanarImage image;
    PlanarImage disparity;
    SceneRecipe recipe;
    std::uint64_t seed = 0;
    std::string description;
    std::vector<std::pair<int, int>> highlights;  ///< dot centers (x, y)
};

/// Deterministic in (recipe, width, height, seed). Textures stay inside
/// [0.02, 0.98]; only highlight dots reach 0.99 and above.
///
/// flat: uniform disparity. two_plane: foreground shape (centered disk of
/// radius min(w,h)/4, centered half-size rectangle, or left half) over a
/// background with its own texture. ramp: disparity rises linearly left to
/// right. highlights: dark far plane (disparity 0) with `count` dots and a
/// near foreground disk (disparity 1) that the dots avoid.
SyntheticScene make_scene(const SceneRecipe& recipe, int width, int height, std::uint64_t seed);

/// Reference composite for a separable two-plane scene: each region is either
/// kept sharp (its layer is 1) or replaced by the normalized convolution of
/// that region's own pixels with the bank kernel of its layer. Throws unless
/// the disparity has exactly two levels and the foreground keeps at least the
/// largest applied kernel radius away from the image border.
PlanarImage ground_truth_composite(const SyntheticScene& scene, double focal, const RenderConfig& cfg);

/// Foreground indicator of a two-plane scene (1 where disparity equals d_fg).
PlanarImage foreground_mask(const SyntheticScene& scene);

}  // namespace softbokeh
