#include "softbokeh/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "softbokeh/imageops.hpp"

namespace softbokeh {

void FusionConfig::validate() const {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("FusionConfig: theta must be in (0,1)");
    if (!(zeta >= 0.0)) throw std::invalid_argument("FusionConfig: zeta must be >= 0");
    if (feather_radius < 0) throw std::invalid_argument("FusionConfig: feather_radius must be >= 0");
    if (steps < 0) throw std::invalid_argument("FusionConfig: steps must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("FusionConfig: learning_rate must be positive");
    if (pyramid_levels < 1) throw std::invalid_argument("FusionConfig: pyramid_levels must be >= 1");
}

namespace {

void check_pair(const PlanarImage& sharp, const PlanarImage& bokeh, const PlanarImage& mask, const char* what) {
    require_same_shape(sharp, bokeh, what);
    require_same_size(sharp, mask, what);
    if (mask.channels() != 1) throw std::invalid_argument(std::string(what) + ": mask must be single-channel");
}

void require_binary(const PlanarImage& mask, const char* what) {
    for (float v : mask.samples())
        if (v != 0.0f && v != 1.0f) throw std::invalid_argument(std::string(what) + ": mask must be binary");
}

PlanarImage select(const PlanarImage& sharp, const PlanarImage& bokeh, const PlanarImage& binary) {
    PlanarImage out(sharp.width(), sharp.height(), sharp.channels());
    const auto m = binary.plane(0);
    for (int c = 0; c < sharp.channels(); ++c) {
        const auto s = sharp.plane(c);
        const auto b = bokeh.plane(c);
        auto d = out.plane(c);
        for (std::size_t i = 0; i < m.size(); ++i) d[i] = m[i] == 1.0f ? s[i] : b[i];
    }
    return out;
}

// State of the mask optimization: E = (M - M_b) * delta with delta = I - B_up.
struct MaskObjective {
    const PlanarImage& delta;
    const PlanarImage& binary;
    double zeta;

    PlanarImage error(const std::vector<double>& mask) const {
        PlanarImage e(delta.width(), delta.height(), delta.channels());
        const auto mb = binary.plane(0);
        for (int c = 0; c < delta.channels(); ++c) {
            const auto d = delta.plane(c);
            auto dst = e.plane(c);
            for (std::size_t i = 0; i < mb.size(); ++i)
                dst[i] = static_cast<float>((mask[i] - static_cast<double>(mb[i])) * d[i]);
        }
        return e;
    }

    double value(const std::vector<double>& mask) const {
        const PlanarImage e = error(mask);
        const PlanarImage lap = laplacian(e);
        const double n = static_cast<double>(e.plane_size());
        const double channels = e.channels();
        double sq = 0.0;
        double abs_sum = 0.0;
        for (float v : lap.samples()) sq += static_cast<double>(v) * v;
        for (float v : e.samples()) abs_sum += std::abs(static_cast<double>(v));
        return zeta * sq / channels / (2.0 * n) + abs_sum / (channels * n);
    }

    // Gradient multiplied by the pixel count, so steps are in per-pixel units.
    std::vector<double> scaled_gradient(const std::vector<double>& mask) const {
        const PlanarImage e = error(mask);
        const PlanarImage back = laplacian_adjoint(laplacian(e));
        const double channels = e.channels();
        std::vector<double> g(mask.size(), 0.0);
        for (int c = 0; c < e.channels(); ++c) {
            const auto d = delta.plane(c);
            const auto ec = e.plane(c);
            const auto bc = back.plane(c);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double sign = ec[i] > 0.0f ? 1.0 : (ec[i] < 0.0f ? -1.0 : 0.0);
                g[i] += (zeta * static_cast<double>(bc[i]) + sign) * d[i] / channels;
            }
        }
        return g;
    }
};

PlanarImage maxpool2_dilate(const PlanarImage& cover, int w, int h) {
    PlanarImage pooled(w, h, 1);
    for (int y = 0; y < cover.height(); ++y)
        for (int x = 0; x < cover.width(); ++x)
            if (cover.at(0, x, y) > 0.0f) pooled.at(0, x / 2, y / 2) = 1.0f;
    PlanarImage dilated(w, h, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float v = 0.0f;
            for (int dy = -1; dy <= 1 && v == 0.0f; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int sx = std::clamp(x + dx, 0, w - 1);
                    const int sy = std::clamp(y + dy, 0, h - 1);
                    if (pooled.at(0, sx, sy) > 0.0f) {
                        v = 1.0f;
                        break;
                    }
                }
            dilated.at(0, x, y) = v;
        }
    }
    return dilated;
}

PlanarImage subtract(const PlanarImage& a, const PlanarImage& b) {
    PlanarImage out = a;
    for (std::size_t i = 0; i < out.samples().size(); ++i) out.samples()[i] -= b.samples()[i];
    return out;
}

PlanarImage add(const PlanarImage& a, const PlanarImage& b) {
    PlanarImage out = a;
    for (std::size_t i = 0; i < out.samples().size(); ++i) out.samples()[i] += b.samples()[i];
    return out;
}

}  // namespace

PlanarImage fuse(const PlanarImage& sharp, const PlanarImage& bokeh, const FusionMask& mask) {
    check_pair(sharp, bokeh, mask.raster, "fuse");
    const auto m = mask.raster.plane(0);
    for (float v : m)
        if (!(v >= 0.0f && v <= 1.0f)) throw std::invalid_argument("fuse: mask values must lie in [0,1]");
    PlanarImage out(sharp.width(), sharp.height(), sharp.channels());
    for (int c = 0; c < sharp.channels(); ++c) {
        const auto s = sharp.plane(c);
        const auto b = bokeh.plane(c);
        auto d = out.plane(c);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 1.0f) {
                d[i] = s[i];
            } else if (m[i] == 0.0f) {
                d[i] = b[i];
            } else {
                const double mv = m[i];
                d[i] = static_cast<float>(mv * s[i] + (1.0 - mv) * b[i]);
            }
        }
    }
    return out;
}

PlanarImage build_target(const PlanarImage& sharp, const PlanarImage& bokeh, const PlanarImage& binary) {
    check_pair(sharp, bokeh, binary, "build_target");
    require_binary(binary, "build_target");
    return select(sharp, bokeh, binary);
}

double poisson_loss(const PlanarImage& target, const PlanarImage& fused) {
    require_same_shape(target, fused, "poisson_loss");
    const PlanarImage lt = laplacian(target);
    const PlanarImage lf = laplacian(fused);
    double sum = 0.0;
    for (std::size_t i = 0; i < lt.samples().size(); ++i) {
        const double d = static_cast<double>(lt.samples()[i]) - static_cast<double>(lf.samples()[i]);
        sum += d * d;
    }
    return sum / target.channels() / (2.0 * static_cast<double>(target.plane_size()));
}

FusionMask feathered_mask(const PlanarImage& binary, int radius) {
    if (binary.channels() != 1) throw std::invalid_argument("feathered_mask: mask must be single-channel");
    if (radius < 0) throw std::invalid_argument("feathered_mask: radius must be >= 0");
    require_binary(binary, "feathered_mask");
    if (radius == 0) return {binary};
    PlanarImage soft = convolve(binary, gaussian_kernel(radius));
    const auto m = binary.plane(0);
    auto s = soft.plane(0);
    for (std::size_t i = 0; i < m.size(); ++i) s[i] = std::clamp(std::max(s[i], m[i]), 0.0f, 1.0f);
    return {std::move(soft)};
}

FusionMask optimize_mask(const PlanarImage& sharp, const PlanarImage& bokeh, const DefocusMap& defocus,
                         const FusionConfig& cfg, OptimizationTrace* trace) {
    cfg.validate();
    check_pair(sharp, bokeh, defocus.raster, "optimize_mask");
    const PlanarImage binary = binary_mask(defocus, cfg.theta);
    FusionMask init = feathered_mask(binary, cfg.feather_radius);

    const PlanarImage delta = subtract(sharp, bokeh);
    const MaskObjective objective{delta, binary, cfg.zeta};
    const auto mb = binary.plane(0);

    std::vector<double> mask(init.raster.plane_size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = init.raster.plane(0)[i];

    OptimizationTrace local;
    double current = objective.value(mask);
    local.loss.push_back(current);
    std::vector<double> candidate(mask.size());
    constexpr int kMaxHalvings = 20;
    for (int step = 0; step < cfg.steps; ++step) {
        const std::vector<double> g = objective.scaled_gradient(mask);
        double lr = cfg.learning_rate;
        bool accepted = false;
        for (int attempt = 0; attempt <= kMaxHalvings && !accepted; ++attempt, lr *= 0.5) {
            for (std::size_t i = 0; i < mask.size(); ++i)
                candidate[i] = mb[i] == 1.0f ? 1.0 : std::clamp(mask[i] - lr * g[i], 0.0, 1.0);
            const double value = objective.value(candidate);
            if (value <= current) {
                mask.swap(candidate);
                current = value;
                accepted = true;
            }
        }
        if (accepted) ++local.accepted_steps;
        local.loss.push_back(current);
    }
    if (trace != nullptr) *trace = std::move(local);

    FusionMask out{PlanarImage(binary.width(), binary.height(), 1)};
    auto dst = out.raster.plane(0);
    for (std::size_t i = 0; i < mask.size(); ++i) dst[i] = static_cast<float>(mask[i]);
    return out;
}

PlanarImage blend_laplacian_pyramid(const PlanarImage& sharp, const PlanarImage& bokeh, const PlanarImage& binary,
                                    int levels) {
    check_pair(sharp, bokeh, binary, "blend_laplacian_pyramid");
    require_binary(binary, "blend_laplacian_pyramid");
    if (levels < 1) throw std::invalid_argument("blend_laplacian_pyramid: levels must be >= 1");
    if (levels == 1) return select(sharp, bokeh, binary);

    const int unit = 1 << (levels - 1);
    const int pw = (sharp.width() + unit - 1) / unit * unit;
    const int ph = (sharp.height() + unit - 1) / unit * unit;

    std::vector<PlanarImage> gs{pad_replicate(sharp, pw, ph)};
    std::vector<PlanarImage> gb{pad_replicate(bokeh, pw, ph)};
    std::vector<PlanarImage> gm{pad_replicate(binary, pw, ph)};
    std::vector<PlanarImage> cover{gm.front()};
    for (int k = 1; k < levels; ++k) {
        const int w = gs.back().width() / 2;
        const int h = gs.back().height() / 2;
        gs.push_back(resize_bilinear(gs.back(), w, h));
        gb.push_back(resize_bilinear(gb.back(), w, h));
        gm.push_back(resize_bilinear(gm.back(), w, h));
        cover.push_back(maxpool2_dilate(cover.back(), w, h));
    }

    auto blend_level = [&](const PlanarImage& a, const PlanarImage& b, int k) {
        PlanarImage out(a.width(), a.height(), a.channels());
        const auto m = gm[static_cast<std::size_t>(k)].plane(0);
        const auto cv = cover[static_cast<std::size_t>(k)].plane(0);
        for (int c = 0; c < a.channels(); ++c) {
            const auto pa = a.plane(c);
            const auto pb = b.plane(c);
            auto d = out.plane(c);
            for (std::size_t i = 0; i < m.size(); ++i) {
                const double w = std::max(m[i], cv[i]);
                d[i] = w == 1.0 ? pa[i] : static_cast<float>(w * pa[i] + (1.0 - w) * pb[i]);
            }
        }
        return out;
    };

    PlanarImage result = blend_level(gs.back(), gb.back(), levels - 1);
    for (int k = levels - 2; k >= 0; --k) {
        const auto kk = static_cast<std::size_t>(k);
        const int w = gs[kk].width();
        const int h = gs[kk].height();
        const PlanarImage ls = subtract(gs[kk], resize_bilinear(gs[kk + 1], w, h));
        const PlanarImage lb = subtract(gb[kk], resize_bilinear(gb[kk + 1], w, h));
        result = add(blend_level(ls, lb, k), resize_bilinear(result, w, h));
    }
    return crop(result, sharp.width(), sharp.height());
}

PlanarImage blend_binary(const PlanarImage& sharp, const PlanarImage& bokeh, const PlanarImage& binary) {
    check_pair(sharp, bokeh, binary, "blend_binary");
    require_binary(binary, "blend_binary");
    return select(sharp, bokeh, binary);
}

PlanarImage fuse_with_method(const PlanarImage& sharp, const PlanarImage& bokeh, const DefocusMap& defocus,
                             const FusionConfig& cfg, FusionMask* mask_out, OptimizationTrace* trace) {
    cfg.validate();
    check_pair(sharp, bokeh, defocus.raster, "fuse_with_method");
    const PlanarImage binary = binary_mask(defocus, cfg.theta);
    switch (cfg.method) {
        case FusionMethod::binary:
            if (mask_out != nullptr) *mask_out = FusionMask{binary};
            return blend_binary(sharp, bokeh, binary);
        case FusionMethod::feathered: {
            FusionMask mask = feathered_mask(binary, cfg.feather_radius);
            PlanarImage out = fuse(sharp, bokeh, mask);
            if (mask_out != nullptr) *mask_out = std::move(mask);
            return out;
        }
        case FusionMethod::laplacian_pyramid:
            if (mask_out != nullptr) *mask_out = FusionMask{binary};
            return blend_laplacian_pyramid(sharp, bokeh, binary, cfg.pyramid_levels);
        case FusionMethod::poisson_optimized: {
            FusionMask mask = optimize_mask(sharp, bokeh, defocus, cfg, trace);
            PlanarImage out = fuse(sharp, bokeh, mask);
            if (mask_out != nullptr) *mask_out = std::move(mask);
            return out;
        }
    }
    throw std::invalid_argument("fuse_with_method: unknown method");
}

FusionMethod parse_fusion_method(const std::string& name) {
    for (FusionMethod m : all_fusion_methods())
        if (to_string(m) == name) return m;
    throw std::invalid_argument("unknown fusion method '" + name +
                                "' (binary, feathered, laplacian_pyramid, poisson_optimized)");
}

std::string to_string(FusionMethod method) {
    switch (method) {
        case FusionMethod::binary: return "binary";
        case FusionMethod::feathered: return "feathered";
        case FusionMethod::laplacian_pyramid: return "laplacian_pyramid";
        case FusionMethod::poisson_optimized: return "poisson_optimized";
    }
    return "binary";
}

std::vector<FusionMethod> all_fusion_methods() {
    return {FusionMethod::binary, FusionMethod::feathered, FusionMethod::laplacian_pyramid,
            FusionMethod::poisson_optimized};
}

}  // namespace softbokeh
