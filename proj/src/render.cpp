#include "softbokeh/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softbokeh {

void RenderConfig::validate() const {
    if (layers < 2) throw std::invalid_argument("RenderConfig: layers must be >= 2");
    if (bank.layers() != layers) throw std::invalid_argument("RenderConfig: bank size must equal layers");
    if (!(gamma > 0.0)) throw std::invalid_argument("RenderConfig: gamma must be positive");
    if (!(eps_div > 0.0)) throw std::invalid_argument("RenderConfig: eps_div must be positive");
    if (!(layer_skip_threshold >= 0.0)) throw std::invalid_argument("RenderConfig: layer_skip_threshold must be >= 0");
    radiance.validate();
}

namespace {

void check_render_inputs(const PlanarImage& image, const DefocusMap& defocus, const RenderConfig& cfg) {
    cfg.validate();
    if (defocus.raster.channels() != 1) throw std::invalid_argument("render: defocus map must be single-channel");
    require_same_size(image, defocus.raster, "render: image and defocus map");
    if (!image.all_finite()) throw std::invalid_argument("render: image contains NaN or Inf");
}

PlanarImage masked(const PlanarImage& src, std::span<const float> mask) {
    PlanarImage out(src.width(), src.height(), src.channels());
    for (int c = 0; c < src.channels(); ++c) {
        const auto s = src.plane(c);
        auto d = out.plane(c);
        for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] * mask[i];
    }
    return out;
}

// Back-to-front accumulation shared by every source; all sources see the same
// masks, occlusion product and denominator.
std::vector<PlanarImage> composite(std::span<const PlanarImage> sources, const DefocusMap& defocus,
                                   const RenderConfig& cfg, RenderDiagnostics* diagnostics) {
    const int w = defocus.raster.width();
    const int h = defocus.raster.height();
    const std::size_t n = defocus.raster.plane_size();
    const std::vector<LayerMask> masks = layer_masks(defocus, cfg.layers, cfg.gamma);

    std::vector<std::vector<double>> numerators;
    for (const auto& s : sources)
        numerators.emplace_back(n * static_cast<std::size_t>(s.channels()), 0.0);
    std::vector<double> denominator(n, 0.0);
    std::vector<double> occlusion(n, 1.0);
    int skipped = 0;

    for (int l = cfg.layers; l >= 1; --l) {
        const auto m = masks[static_cast<std::size_t>(l - 1)].raster.plane(0);
        const float peak = *std::max_element(m.begin(), m.end());
        if (static_cast<double>(peak) >= cfg.layer_skip_threshold) {
            std::vector<PlanarImage> inputs;
            inputs.reserve(sources.size() + 1);
            for (const auto& s : sources) inputs.push_back(masked(s, m));
            inputs.push_back(masks[static_cast<std::size_t>(l - 1)].raster);

            const Kernel2D& kernel = cfg.bank[l - 1];
            const std::vector<PlanarImage> blurred =
                kernel.is_identity() ? inputs : convolve_many(inputs, kernel, cfg.convolution);

            for (std::size_t s = 0; s < sources.size(); ++s) {
                auto& num = numerators[s];
                for (int c = 0; c < sources[s].channels(); ++c) {
                    const auto b = blurred[s].plane(c);
                    double* dst = num.data() + static_cast<std::size_t>(c) * n;
                    for (std::size_t i = 0; i < n; ++i) dst[i] += static_cast<double>(b[i]) * occlusion[i];
                }
            }
            const auto bm = blurred.back().plane(0);
            for (std::size_t i = 0; i < n; ++i) denominator[i] += static_cast<double>(bm[i]) * occlusion[i];
        } else {
            ++skipped;
        }
        for (std::size_t i = 0; i < n; ++i) occlusion[i] *= 1.0 - static_cast<double>(m[i]);
    }

    std::size_t floored = 0;
    std::vector<std::size_t> floored_indices;
    for (std::size_t i = 0; i < n; ++i) {
        if (denominator[i] < cfg.eps_div) {
            denominator[i] = cfg.eps_div;
            ++floored;
            floored_indices.push_back(i);
        }
    }
    if (diagnostics != nullptr) {
        diagnostics->floored_pixels += floored;
        diagnostics->floored_indices.insert(diagnostics->floored_indices.end(), floored_indices.begin(),
                                            floored_indices.end());
        diagnostics->skipped_layers += skipped;
    }

    std::vector<PlanarImage> out;
    out.reserve(sources.size());
    for (std::size_t s = 0; s < sources.size(); ++s) {
        PlanarImage img(w, h, sources[s].channels());
        for (int c = 0; c < img.channels(); ++c) {
            auto dst = img.plane(c);
            const double* num = numerators[s].data() + static_cast<std::size_t>(c) * n;
            for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(num[i] / denominator[i]);
        }
        out.push_back(std::move(img));
    }
    return out;
}

PlanarImage pad_to_even(const PlanarImage& img) {
    const int w = img.width() + (img.width() % 2);
    const int h = img.height() + (img.height() % 2);
    if (w == img.width() && h == img.height()) return img;
    return pad_replicate(img, w, h);
}

void check_disparity(const PlanarImage& image, const PlanarImage& disparity) {
    if (image.channels() != 3) throw std::invalid_argument("render_pipeline: image must have 3 channels");
    if (disparity.channels() != 1) throw std::invalid_argument("render_pipeline: disparity must be single-channel");
    require_same_size(image, disparity, "render_pipeline: image and disparity");
    if (!image.all_finite()) throw std::invalid_argument("render_pipeline: image contains NaN or Inf");
    for (float v : disparity.samples())
        if (!(v >= 0.0f && v <= 1.0f)) throw std::invalid_argument("render_pipeline: disparity must lie in [0,1]");
}

// Pipeline body on cached planes: `padded` has even dimensions and `half_*` are
// its exact half-resolution resamples.
PlanarImage render_from_half(const PlanarImage& padded, const PlanarImage& half_image,
                             const PlanarImage& half_disparity, int out_w, int out_h, double focal,
                             const RenderConfig& cfg, const FusionConfig& fusion,
                             PipelineIntermediates* intermediates) {
    cfg.validate();
    fusion.validate();
    DefocusMap d_lr = defocus_magnitude(signed_defocus(half_disparity, focal), cfg.normalization);
    RadianceMap radiance = virtualize(half_image, cfg.radiance);

    RenderDiagnostics diag;
    PlanarImage b_lr = weighted_render(half_image, radiance, d_lr, cfg, &diag);
    // An all-identity bank renders any image to itself, so the full-resolution
    // bokeh is the input rather than a resampled copy of it.
    const bool no_blur = std::all_of(cfg.bank.kernels.begin(), cfg.bank.kernels.end(),
                                     [](const Kernel2D& k) { return k.is_identity(); });
    PlanarImage b_up = no_blur ? padded : resize_bilinear(b_lr, padded.width(), padded.height());
    const DefocusMap d_hr{resize_bilinear(d_lr.raster, padded.width(), padded.height())};

    FusionMask mask{PlanarImage(1, 1, 1)};
    OptimizationTrace trace;
    PlanarImage fused = fuse_with_method(padded, b_up, d_hr, fusion, &mask, &trace);

    if (intermediates != nullptr) {
        intermediates->defocus_lr = std::move(d_lr);
        intermediates->radiance_lr = std::move(radiance);
        intermediates->fusion_mask = std::move(mask);
        intermediates->bokeh_lr = std::move(b_lr);
        intermediates->bokeh_up = std::move(b_up);
        intermediates->trace = std::move(trace);
        intermediates->render = std::move(diag);
    }
    if (fused.width() == out_w && fused.height() == out_h) return fused;
    return crop(fused, out_w, out_h);
}

}  // namespace

LayerStack decompose_layers(const PlanarImage& image, const DefocusMap& defocus, const RenderConfig& cfg) {
    check_render_inputs(image, defocus, cfg);
    LayerStack stack;
    stack.layers = cfg.layers;
    stack.masks = layer_masks(defocus, cfg.layers, cfg.gamma);
    for (const auto& mask : stack.masks) {
        const std::vector<PlanarImage> inputs{masked(image, mask.raster.plane(0)), mask.raster};
        const Kernel2D& kernel = cfg.bank[mask.layer - 1];
        std::vector<PlanarImage> blurred = kernel.is_identity() ? inputs : convolve_many(inputs, kernel, cfg.convolution);
        stack.blurred_layers.push_back(std::move(blurred[0]));
        stack.blurred_masks.push_back(std::move(blurred[1]));
    }
    return stack;
}

PlanarImage layered_render(const PlanarImage& image, const DefocusMap& defocus, const RenderConfig& cfg,
                           RenderDiagnostics* diagnostics) {
    check_render_inputs(image, defocus, cfg);
    const PlanarImage sources[] = {image};
    return std::move(composite(sources, defocus, cfg, diagnostics)[0]);
}

PlanarImage weighted_render(const PlanarImage& image, const RadianceMap& radiance, const DefocusMap& defocus,
                            const RenderConfig& cfg, RenderDiagnostics* diagnostics) {
    check_render_inputs(image, defocus, cfg);
    const PlanarImage& r = radiance.raster;
    if (r.channels() != image.channels() || !r.same_size(image))
        throw std::invalid_argument("weighted_render: radiance must match the image shape");
    if (!r.all_finite() || r.min_value() < 0.0f)
        throw std::invalid_argument("weighted_render: radiance must be finite and non-negative");

    PlanarImage weighted(image.width(), image.height(), image.channels());
    for (std::size_t k = 0; k < image.samples().size(); ++k) weighted.samples()[k] = image.samples()[k] * r.samples()[k];

    const PlanarImage sources[] = {weighted, r};
    std::vector<PlanarImage> rendered = composite(sources, defocus, cfg, diagnostics);
    const PlanarImage& num = rendered[0];
    const PlanarImage& den = rendered[1];

    PlanarImage out(image.width(), image.height(), image.channels());
    for (std::size_t k = 0; k < out.samples().size(); ++k) {
        const double d = std::max(static_cast<double>(den.samples()[k]), cfg.eps_div);
        out.samples()[k] = static_cast<float>(static_cast<double>(num.samples()[k]) / d);
    }
    return out;
}

RenderConfig with_blur_scale(const RenderConfig& cfg, double blur_scale) {
    if (!(blur_scale >= 0.0) || !std::isfinite(blur_scale))
        throw std::invalid_argument("blur_scale must be finite and >= 0");
    RenderConfig scaled = cfg;
    scaled.bank = build_bank(scale_schedule(cfg.bank.schedule, blur_scale), cfg.bank.shape, cfg.bank.sigma,
                             cfg.bank.phi);
    return scaled;
}

PlanarImage render_pipeline(const PlanarImage& image, const PlanarImage& disparity, double focal,
                            const RenderConfig& cfg, const FusionConfig& fusion,
                            PipelineIntermediates* intermediates) {
    check_disparity(image, disparity);
    const PlanarImage padded = pad_to_even(image);
    const PlanarImage padded_disparity = pad_to_even(disparity);
    const int hw = padded.width() / 2;
    const int hh = padded.height() / 2;
    return render_from_half(padded, resize_bilinear(padded, hw, hh), resize_bilinear(padded_disparity, hw, hh),
                            image.width(), image.height(), focal, cfg, fusion, intermediates);
}

RefocusSession::RefocusSession(PlanarImage image, PlanarImage disparity, RenderConfig cfg, FusionConfig fusion)
    : image_(std::move(image)),
      disparity_(std::move(disparity)),
      padded_image_(1, 1, 1),
      half_image_(1, 1, 1),
      half_disparity_(1, 1, 1),
      cfg_(std::move(cfg)),
      fusion_(fusion) {
    check_disparity(image_, disparity_);
    cfg_.validate();
    fusion_.validate();
    padded_image_ = pad_to_even(image_);
    const int hw = padded_image_.width() / 2;
    const int hh = padded_image_.height() / 2;
    half_image_ = resize_bilinear(padded_image_, hw, hh);
    half_disparity_ = resize_bilinear(pad_to_even(disparity_), hw, hh);
}

PlanarImage RefocusSession::refocus(double focal, double blur_scale, const FusionConfig& fusion,
                                   PipelineIntermediates* intermediates) const {
    const RenderConfig cfg = blur_scale == 1.0 ? cfg_ : with_blur_scale(cfg_, blur_scale);
    return render_from_half(padded_image_, half_image_, half_disparity_, image_.width(), image_.height(), focal, cfg,
                            fusion, intermediates);
}

DefocusMap RefocusSession::defocus_at(double focal) const {
    return defocus_magnitude(signed_defocus(disparity_, focal), cfg_.normalization);
}

}  // namespace softbokeh
