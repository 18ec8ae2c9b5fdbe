#pragma once

#include <string>
#include <vector>

#include "softbokeh/image.hpp"

namespace softbokeh {

enum class KernelShape { hard, soft };
enum class ScheduleSampling { growing, uniform, scaled };

/// Kernel side lengths per defocus layer; sizes[0] belongs to layer 1.
struct KernelSchedule {
    std::vector<int> sizes;
    ScheduleSampling sampling = ScheduleSampling::growing;

    int layers() const noexcept { return static_cast<int>(sizes.size()); }
};

/// One normalized kernel per layer. kernels[0] is always the identity: layer 1
/// carries the in-focus pixels and is never blurred.
struct KernelBank {
    KernelSchedule schedule;
    std::vector<Kernel2D> kernels;
    KernelShape shape = KernelShape::soft;
    double sigma = 0.25;
    double phi = 0.5;

    int layers() const noexcept { return static_cast<int>(kernels.size()); }
    const Kernel2D& operator[](int layer_index) const { return kernels.at(static_cast<std::size_t>(layer_index)); }
};

/// Binary disk: 1 where r^2 - x^2 - y^2 >= 0, normalized. Side 2*ceil(r)+1.
Kernel2D hard_disk(double radius);

/// Smooth disk 1/2 + 1/2 tanh(sigma (r^2 - x^2 - y^2) + phi), normalized.
/// Side 2*ceil(r)+1.
Kernel2D soft_disk(double radius, double sigma, double phi);

/// Un-normalized tap values, exposed for inspection and tests.
double hard_disk_tap(int x, int y, double radius);
double soft_disk_tap(int x, int y, double radius, double sigma, double phi);

/// Piecewise-linear kernel side for blur layers 1..14:
///   2l+1 (l<3), 4(l-3)+7 (l<8), 6(l-8)+27 (l<11), 8(l-11)+45 (l<15).
int growing_kernel_size(int l);

/// 15 layers: the identity layer followed by growing_kernel_size(1..14),
/// i.e. {1, 3, 5, 7, 11, ..., 69}.
KernelSchedule growing_schedule();

/// sizes = 3, 3+step, 3+2*step, ... (L entries). Requires L >= 2, even step > 0.
KernelSchedule uniform_schedule(int layers, int step);

/// Multiplies every side by `scale` and rounds to the nearest odd integer
/// (minimum 1). Layer 1 stays 1. scale == 0 collapses all layers to identity.
/// The result is non-decreasing but may repeat sizes once small sides merge.
KernelSchedule scale_schedule(const KernelSchedule& schedule, double scale);

KernelBank build_bank(const KernelSchedule& schedule, KernelShape shape, double sigma = 0.25, double phi = 0.5);

KernelShape parse_kernel_shape(const std::string& name);
std::string to_string(KernelShape shape);

}  // namespace softbokeh
