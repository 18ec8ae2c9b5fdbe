#include "softbokeh/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "softbokeh/defocus.hpp"
#include "softbokeh/imageops.hpp"

namespace softbokeh {

namespace {

// Explicit bit-to-double mapping keeps scenes identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

struct Wave {
    double amplitude, fx, fy, phase;
};

// Sum-of-sinusoids colour texture plus fine uniform noise, clamped to [0.02, 0.98].
PlanarImage texture(int w, int h, Rng& rng, double lo, double hi) {
    PlanarImage img(w, h, 3);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int c = 0; c < 3; ++c) {
        const double base = rng.uniform(0.35, 0.65);
        std::vector<Wave> waves(6);
        for (auto& wave : waves)
            wave = {rng.uniform(0.02, 0.05), rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), rng.uniform(0.0, two_pi)};
        auto plane = img.plane(c);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double v = base;
                for (const auto& wave : waves)
                    v += wave.amplitude *
                         std::sin(two_pi * (wave.fx * x / w + wave.fy * y / h) + wave.phase);
                v += rng.uniform(-0.03, 0.03);
                v = lo + (hi - lo) * std::clamp(v, 0.0, 1.0);
                plane[static_cast<std::size_t>(y) * w + x] = static_cast<float>(std::clamp(v, 0.02, 0.98));
            }
        }
    }
    return img;
}

bool in_shape(SceneShape shape, int x, int y, int w, int h) {
    const double cx = (w - 1) / 2.0;
    const double cy = (h - 1) / 2.0;
    switch (shape) {
        case SceneShape::disk: {
            const double r = std::min(w, h) / 4.0;
            return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
        }
        case SceneShape::rect: return x >= w / 4 && x < w / 4 + w / 2 && y >= h / 4 && y < h / 4 + h / 2;
        case SceneShape::half: return x < w / 2;
    }
    return false;
}

void check_disparity_value(double d, const char* what) {
    if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument(std::string(what) + ": disparity must be in [0,1]");
}

void validate_recipe(const SceneRecipe& recipe) {
    switch (recipe.kind) {
        case SceneKind::flat: check_disparity_value(recipe.disparity, "flat"); break;
        case SceneKind::two_plane:
            break;
        case SceneKind::ramp: break;
        case SceneKind::highlights:
            if (recipe.highlight_count < 0) throw std::invalid_argument("highlights: count must be >= 0");
            if (!(recipe.intensity >= 0.99 && recipe.intensity <= 1.0))
                throw std::invalid_argument("highlights: intensity must be in [0.99, 1]");
            break;
    }
}

std::string format_double(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

}  // namespace

SceneRecipe SceneRecipe::flat(double d) {
    SceneRecipe r;
    r.kind = SceneKind::flat;
    r.disparity = d;
    return r;
}

SceneRecipe SceneRecipe::two_plane(double fg, double bg, SceneShape shape) {
    SceneRecipe r;
    r.kind = SceneKind::two_plane;
    r.d_fg = fg;
    r.d_bg = bg;
    r.shape = shape;
    return r;
}

SceneRecipe SceneRecipe::ramp() {
    SceneRecipe r;
    r.kind = SceneKind::ramp;
    return r;
}

SceneRecipe SceneRecipe::highlights(int count, double intensity) {
    SceneRecipe r;
    r.kind = SceneKind::highlights;
    r.highlight_count = count;
    r.intensity = intensity;
    r.d_fg = 1.0;
    r.d_bg = 0.0;
    return r;
}

std::string SceneRecipe::describe() const {
    switch (kind) {
        case SceneKind::flat: return "flat:" + format_double(disparity);
        case SceneKind::two_plane:
            return "two_plane:" + format_double(d_fg) + ":" + format_double(d_bg) + ":" + to_string(shape);
        case SceneKind::ramp: return "ramp";
        case SceneKind::highlights:
            return "highlights:" + std::to_string(highlight_count) + ":" + format_double(intensity);
    }
    return "flat";
}

SceneShape parse_shape(const std::string& name) {
    if (name == "disk") return SceneShape::disk;
    if (name == "rect") return SceneShape::rect;
    if (name == "half") return SceneShape::half;
    throw std::invalid_argument("unknown scene shape '" + name + "' (disk, rect, half)");
}

std::string to_string(SceneShape shape) {
    switch (shape) {
        case SceneShape::disk: return "disk";
        case SceneShape::rect: return "rect";
        case SceneShape::half: return "half";
    }
    return "disk";
}

SceneRecipe parse_recipe(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string part; std::getline(in, part, ':');) parts.push_back(part);
    if (parts.empty()) throw std::invalid_argument("empty scene recipe");
    auto number = [&](std::size_t i) {
        try {
            std::size_t used = 0;
            const double v = std::stod(parts.at(i), &used);
            if (used != parts[i].size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("bad scene recipe '" + text + "'");
        }
    };
    const std::string& kind = parts[0];
    auto checked = [](SceneRecipe r) {
        validate_recipe(r);
        return r;
    };
    if (kind == "flat" && parts.size() == 2) return checked(SceneRecipe::flat(number(1)));
    if (kind == "two_plane" && parts.size() == 4)
        return checked(SceneRecipe::two_plane(number(1), number(2), parse_shape(parts[3])));
    if (kind == "ramp" && parts.size() == 1) return SceneRecipe::ramp();
    if (kind == "highlights" && parts.size() == 3) {
        const double n = number(1);
        if (n != std::floor(n)) throw std::invalid_argument("bad scene recipe '" + text + "'");
        return checked(SceneRecipe::highlights(static_cast<int>(n), number(2)));
    }
    throw std::invalid_argument("bad scene recipe '" + text +
                                "' (flat:D, two_plane:FG:BG:SHAPE, ramp, highlights:N:I)");
}

SyntheticScene make_scene(const SceneRecipe& recipe, int width, int height, std::uint64_t seed) {
    if (width < 1 || height < 1) throw std::invalid_argument("make_scene: size must be positive");
    validate_recipe(recipe);
    Rng rng(seed);
    SyntheticScene scene{PlanarImage(width, height, 3), PlanarImage(width, height, 1), recipe, seed,
                         recipe.describe(), {}};
    auto disparity = scene.disparity.plane(0);

    switch (recipe.kind) {
        case SceneKind::flat: {
            scene.image = texture(width, height, rng, 0.0, 1.0);
            std::fill(disparity.begin(), disparity.end(), static_cast<float>(recipe.disparity));
            break;
        }
        case SceneKind::two_plane: {
            if (recipe.d_fg == recipe.d_bg) throw std::invalid_argument("two_plane: planes must differ");
            const PlanarImage fg = texture(width, height, rng, 0.0, 1.0);
            const PlanarImage bg = texture(width, height, rng, 0.0, 1.0);
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) {
                    const bool inside = in_shape(recipe.shape, x, y, width, height);
                    for (int c = 0; c < 3; ++c) scene.image.at(c, x, y) = inside ? fg.at(c, x, y) : bg.at(c, x, y);
                    scene.disparity.at(0, x, y) = static_cast<float>(inside ? recipe.d_fg : recipe.d_bg);
                }
            break;
        }
        case SceneKind::ramp: {
            scene.image = texture(width, height, rng, 0.0, 1.0);
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x)
                    scene.disparity.at(0, x, y) =
                        width == 1 ? 0.0f : static_cast<float>(static_cast<double>(x) / (width - 1));
            break;
        }
        case SceneKind::highlights: {
            const PlanarImage fg = texture(width, height, rng, 0.0, 1.0);
            const PlanarImage bg = texture(width, height, rng, 0.05, 0.3);
            const double cx = (width - 1) / 2.0;
            const double cy = (height - 1) / 2.0;
            const double fg_r = std::min(width, height) / 6.0;
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) {
                    const bool inside = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= fg_r * fg_r;
                    for (int c = 0; c < 3; ++c) scene.image.at(c, x, y) = inside ? fg.at(c, x, y) : bg.at(c, x, y);
                    scene.disparity.at(0, x, y) = inside ? 1.0f : 0.0f;
                }

            constexpr int margin = 4;
            constexpr double spacing = 8.0;
            std::vector<std::pair<int, int>> dots;
            for (int attempt = 0; attempt < 1000 * (recipe.highlight_count + 1) &&
                                  static_cast<int>(dots.size()) < recipe.highlight_count;
                 ++attempt) {
                const int x = margin + static_cast<int>(rng.uniform() * std::max(1, width - 2 * margin));
                const int y = margin + static_cast<int>(rng.uniform() * std::max(1, height - 2 * margin));
                if (std::hypot(x - cx, y - cy) < fg_r + margin) continue;
                const bool crowded = std::any_of(dots.begin(), dots.end(), [&](const auto& d) {
                    return std::hypot(d.first - x, d.second - y) < spacing;
                });
                if (!crowded) dots.emplace_back(x, y);
            }
            if (static_cast<int>(dots.size()) < recipe.highlight_count)
                throw std::invalid_argument("highlights: image too small for the requested dots");
            for (const auto& [x, y] : dots)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int px = std::clamp(x + dx, 0, width - 1);
                        const int py = std::clamp(y + dy, 0, height - 1);
                        for (int c = 0; c < 3; ++c) scene.image.at(c, px, py) = static_cast<float>(recipe.intensity);
                    }
            scene.highlights = std::move(dots);
            break;
        }
    }
    return scene;
}

PlanarImage foreground_mask(const SyntheticScene& scene) {
    if (scene.recipe.kind != SceneKind::two_plane)
        throw std::invalid_argument("foreground_mask: scene is not a two-plane recipe");
    PlanarImage mask(scene.disparity.width(), scene.disparity.height(), 1);
    const float fg = static_cast<float>(scene.recipe.d_fg);
    const auto d = scene.disparity.plane(0);
    auto m = mask.plane(0);
    for (std::size_t i = 0; i < d.size(); ++i) m[i] = d[i] == fg ? 1.0f : 0.0f;
    return mask;
}

PlanarImage ground_truth_composite(const SyntheticScene& scene, double focal, const RenderConfig& cfg) {
    cfg.validate();
    if (scene.recipe.kind != SceneKind::two_plane)
        throw std::invalid_argument("ground_truth_composite: only two-plane scenes have a ground truth");

    const float fg_value = static_cast<float>(scene.recipe.d_fg);
    const float bg_value = static_cast<float>(scene.recipe.d_bg);
    const int w = scene.image.width();
    const int h = scene.image.height();
    int min_x = w, min_y = h, max_x = -1, max_y = -1;
    bool has_bg = false;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float v = scene.disparity.at(0, x, y);
            if (v == fg_value) {
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
            } else if (v == bg_value) {
                has_bg = true;
            } else {
                throw std::invalid_argument("ground_truth_composite: disparity has more than two levels");
            }
        }
    if (max_x < 0 || !has_bg) throw std::invalid_argument("ground_truth_composite: scene needs both planes");

    const DefocusMap defocus = defocus_magnitude(signed_defocus(scene.disparity, focal), cfg.normalization);
    const PlanarImage fg = foreground_mask(scene);
    int fg_layer = 1;
    int bg_layer = 1;
    for (std::size_t i = 0; i < fg.plane_size(); ++i) {
        const int l = dominant_layer(defocus.raster.plane(0)[i], cfg.layers, cfg.gamma);
        (fg.plane(0)[i] == 1.0f ? fg_layer : bg_layer) = l;
    }

    const int radius = std::max(cfg.bank[fg_layer - 1].radius(), cfg.bank[bg_layer - 1].radius());
    const int border = std::min({min_x, min_y, w - 1 - max_x, h - 1 - max_y});
    if (border < radius)
        throw std::invalid_argument("ground_truth_composite: foreground within kernel reach of the border");

    PlanarImage out = scene.image;
    for (const bool foreground : {true, false}) {
        const int layer = foreground ? fg_layer : bg_layer;
        const Kernel2D& kernel = cfg.bank[layer - 1];
        if (kernel.is_identity()) continue;
        PlanarImage region(w, h, 1);
        for (std::size_t i = 0; i < region.plane_size(); ++i)
            region.plane(0)[i] = (fg.plane(0)[i] == 1.0f) == foreground ? 1.0f : 0.0f;
        PlanarImage weighted = scene.image;
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < region.plane_size(); ++i) weighted.plane(c)[i] *= region.plane(0)[i];
        const PlanarImage inputs[] = {weighted, region};
        const std::vector<PlanarImage> blurred = convolve_many(inputs, kernel, cfg.convolution);
        for (std::size_t i = 0; i < region.plane_size(); ++i) {
            if (region.plane(0)[i] != 1.0f) continue;
            const double den = blurred[1].plane(0)[i];
            for (int c = 0; c < 3; ++c)
                out.plane(c)[i] = static_cast<float>(blurred[0].plane(c)[i] / den);
        }
    }
    return out;
}

}  // namespace softbokeh
