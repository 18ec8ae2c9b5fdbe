#pragma once

#include <span>
#include <utility>
#include <vector>

#include "softbokeh/image.hpp"

namespace softbokeh {

enum class ConvolutionMode { reference, optimized };

/// Bilinear resampling with half-pixel-center alignment (source coordinates
/// clamped to the image, no antialiasing prefilter).
PlanarImage resize_bilinear(const PlanarImage& img, int width, int height);

/// Per-channel 2-D correlation with replicate-edge borders. `reference` is a
/// direct quadruple loop; `optimized` uses row-tiled direct convolution for
/// small kernels and an FFT for large ones. Both agree within 1e-5.
/// Throws std::invalid_argument for an unnormalized kernel or non-finite input.
PlanarImage convolve(const PlanarImage& img, const Kernel2D& kernel,
                     ConvolutionMode mode = ConvolutionMode::optimized);

/// Convolves every channel of every image with the same kernel, sharing the
/// kernel spectrum across planes. Equivalent to calling convolve() on each.
std::vector<PlanarImage> convolve_many(std::span<const PlanarImage> images, const Kernel2D& kernel,
                                       ConvolutionMode mode = ConvolutionMode::optimized);

/// Kernel side at or above which the optimized path switches to the FFT.
inline constexpr int kFftKernelThreshold = 13;

/// 4-neighbour Laplacian (center -4, cross +1), replicate border.
PlanarImage laplacian(const PlanarImage& img);

/// Adjoint of laplacian() under the plain sum inner product. Differs from
/// laplacian() only on border pixels.
PlanarImage laplacian_adjoint(const PlanarImage& img);

/// Forward differences; the last column of d/dx and last row of d/dy are zero.
std::pair<PlanarImage, PlanarImage> gradients_xy(const PlanarImage& img);

/// Normalized Gaussian with the given half-width; sigma = radius / 2.
Kernel2D gaussian_kernel(int radius);

/// Replicate-pads the right and bottom edges up to (width, height).
PlanarImage pad_replicate(const PlanarImage& img, int width, int height);
/// Top-left (width, height) crop.
PlanarImage crop(const PlanarImage& img, int width, int height);

}  // namespace softbokeh
