#pragma once

#include <string>
#include <vector>

#include "softbokeh/defocus.hpp"
#include "softbokeh/image.hpp"

namespace softbokeh {

enum class FusionMethod { binary, feathered, laplacian_pyramid, poisson_optimized };

struct FusionConfig {
    double theta = 0.25;         ///< binary-mask threshold on D
    double zeta = 10.0;          ///< weight of the Poisson gradient term
    int feather_radius = 5;      ///< Gaussian half-width of the initial soft mask
    int steps = 200;             ///< gradient-descent updates; 0 keeps the feathered mask
    double learning_rate = 0.05;
    FusionMethod method = FusionMethod::poisson_optimized;
    int pyramid_levels = 4;

    void validate() const;
};

/// Soft blend weight in [0,1] at full resolution; 1 keeps the sharp original.
struct FusionMask {
    PlanarImage raster;
};

struct OptimizationTrace {
    std::vector<double> loss;  ///< objective before the first step, then after each step
    int accepted_steps = 0;
};

/// M * sharp + (1 - M) * bokeh.
PlanarImage fuse(const PlanarImage& sharp, const PlanarImage& bokeh, const FusionMask& mask);

/// sharp * M_b + bokeh * (1 - M_b). Rejects a mask with values other than 0/1.
PlanarImage build_target(const PlanarImage& sharp, const PlanarImage& bokeh, const PlanarImage& binary);

/// (1 / 2HW) * sum over pixels of the channel-averaged squared difference of
/// Laplacians.
double poisson_loss(const PlanarImage& target, const PlanarImage& fused);

/// Soft mask grown outward from the binary seed: max(M_b, G * M_b). Pixels
/// of the sharp region stay exactly 1.
FusionMask feathered_mask(const PlanarImage& binary, int radius);

/// Projected gradient descent on the soft mask, starting from feathered_mask,
/// minimizing zeta * poisson_loss(B_t, B_hr) + l1(B_hr, B_t). Pixels with
/// M_b = 1 are held at 1. Each step backtracks from the configured learning
/// rate until the objective does not increase, so the trace is non-increasing.
/// `defocus` must already be at full resolution.
FusionMask optimize_mask(const PlanarImage& sharp, const PlanarImage& bokeh, const DefocusMap& defocus,
                         const FusionConfig& cfg, OptimizationTrace* trace = nullptr);

/// Multi-band blend. Band k uses the Gaussian pyramid of M_b, raised to 1 on
/// every coarse pixel that reconstructs a sharp-region pixel, so the sharp
/// region is returned unchanged.
PlanarImage blend_laplacian_pyramid(const PlanarImage& sharp, const PlanarImage& bokeh, const PlanarImage& binary,
                                    int levels);

/// Hard cut along M_b.
PlanarImage blend_binary(const PlanarImage& sharp, const PlanarImage& bokeh, const PlanarImage& binary);

/// Runs the configured method. `defocus` is the full-resolution defocus map.
PlanarImage fuse_with_method(const PlanarImage& sharp, const PlanarImage& bokeh, const DefocusMap& defocus,
                             const FusionConfig& cfg, FusionMask* mask_out = nullptr,
                             OptimizationTrace* trace = nullptr);

FusionMethod parse_fusion_method(const std::string& name);
std::string to_string(FusionMethod method);
std::vector<FusionMethod> all_fusion_methods();

}  // namespace softbokeh
