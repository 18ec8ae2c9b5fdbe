#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "softbokeh/defocus.hpp"
#include "softbokeh/fusion.hpp"
#include "softbokeh/image.hpp"
#include "softbokeh/imageops.hpp"
#include "softbokeh/kernels.hpp"
#include "softbokeh/radiance.hpp"

namespace softbokeh {

struct RenderConfig {
    int layers = 15;
    double gamma = 100.0;
    KernelBank bank = build_bank(growing_schedule(), KernelShape::soft, 0.25, 0.5);
    RadianceParams radiance;
    double eps_div = 1e-6;
    DefocusNormalization normalization = DefocusNormalization::fixed_range;
    /// Layers whose mask never exceeds this value skip their convolutions
    /// (their occlusion factor is still applied).
    double layer_skip_threshold = 1e-9;
    ConvolutionMode convolution = ConvolutionMode::optimized;

    void validate() const;
};

struct RenderDiagnostics {
    std::size_t floored_pixels = 0;        ///< pixels whose denominator hit eps_div
    std::vector<std::size_t> floored_indices;
    int skipped_layers = 0;
};

/// Per-layer state of the decomposition, materialized for inspection.
struct LayerStack {
    int layers = 0;
    std::vector<LayerMask> masks;
    std::vector<PlanarImage> blurred_layers;  ///< K(r_l) * (M_l I)
    std::vector<PlanarImage> blurred_masks;   ///< K(r_l) * M_l
};

LayerStack decompose_layers(const PlanarImage& image, const DefocusMap& defocus, const RenderConfig& cfg);

/// sum_l B_l prod_{j>l}(1 - M_j) / sum_l (K_l * M_l) prod_{j>l}(1 - M_j),
/// accumulated back to front with a running occlusion product.
PlanarImage layered_render(const PlanarImage& image, const DefocusMap& defocus, const RenderConfig& cfg,
                           RenderDiagnostics* diagnostics = nullptr);

/// layered_render(R * I) / layered_render(R), per channel.
PlanarImage weighted_render(const PlanarImage& image, const RadianceMap& radiance, const DefocusMap& defocus,
                            const RenderConfig& cfg, RenderDiagnostics* diagnostics = nullptr);

struct PipelineIntermediates {
    std::optional<DefocusMap> defocus_lr;
    std::optional<RadianceMap> radiance_lr;
    std::optional<FusionMask> fusion_mask;
    std::optional<PlanarImage> bokeh_lr;
    std::optional<PlanarImage> bokeh_up;
    OptimizationTrace trace;
    RenderDiagnostics render;
};

/// Full chain: half-resolution defocus, radiance and weighted render, bilinear
/// upsample, then fusion with the sharp input. Odd sizes are edge-padded to
/// even and cropped back.
PlanarImage render_pipeline(const PlanarImage& image, const PlanarImage& disparity, double focal,
                            const RenderConfig& cfg, const FusionConfig& fusion,
                            PipelineIntermediates* intermediates = nullptr);

/// Copy of `cfg` whose bank uses the schedule scaled by `blur_scale`.
RenderConfig with_blur_scale(const RenderConfig& cfg, double blur_scale);

/// Holds one image/disparity pair with its half-resolution planes cached, and
/// re-renders it for any focal plane and blur amount.
class RefocusSession {
public:
    RefocusSession(PlanarImage image, PlanarImage disparity, RenderConfig cfg = {}, FusionConfig fusion = {});

    PlanarImage refocus(double focal, double blur_scale) const { return refocus(focal, blur_scale, fusion_); }
    PlanarImage refocus(double focal, double blur_scale, const FusionConfig& fusion,
                        PipelineIntermediates* intermediates = nullptr) const;

    /// Full-resolution defocus map for `focal`.
    DefocusMap defocus_at(double focal) const;

    const PlanarImage& image() const noexcept { return image_; }
    const PlanarImage& disparity() const noexcept { return disparity_; }
    const PlanarImage& half_image() const noexcept { return half_image_; }
    const PlanarImage& half_disparity() const noexcept { return half_disparity_; }
    const RenderConfig& config() const noexcept { return cfg_; }
    const FusionConfig& fusion_config() const noexcept { return fusion_; }

private:
    PlanarImage image_;
    PlanarImage disparity_;
    PlanarImage padded_image_;
    PlanarImage half_image_;
    PlanarImage half_disparity_;
    RenderConfig cfg_;
    FusionConfig fusion_;
};

}  // namespace softbokeh
