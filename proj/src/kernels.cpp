#include "softbokeh/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softbokeh {

namespace {

int support_radius(double radius) { return static_cast<int>(std::ceil(radius)); }

void validate_schedule(const KernelSchedule& schedule) {
    if (schedule.sizes.size() < 2) throw std::invalid_argument("KernelSchedule: need at least 2 layers");
    for (std::size_t i = 0; i < schedule.sizes.size(); ++i) {
        const int s = schedule.sizes[i];
        if (s < 1 || s % 2 == 0) throw std::invalid_argument("KernelSchedule: sizes must be odd and positive");
        if (i > 0 && s < schedule.sizes[i - 1]) throw std::invalid_argument("KernelSchedule: sizes must not decrease");
    }
}

}  // namespace

double hard_disk_tap(int x, int y, double radius) {
    return radius * radius - static_cast<double>(x) * x - static_cast<double>(y) * y < 0.0 ? 0.0 : 1.0;
}

double soft_disk_tap(int x, int y, double radius, double sigma, double phi) {
    const double arg = sigma * (radius * radius - static_cast<double>(x) * x - static_cast<double>(y) * y) + phi;
    return 0.5 + 0.5 * std::tanh(arg);
}

Kernel2D hard_disk(double radius) {
    if (!(radius >= 1.0)) throw std::invalid_argument("hard_disk: radius must be >= 1");
    const int r = support_radius(radius);
    const int size = 2 * r + 1;
    std::vector<double> taps(static_cast<std::size_t>(size) * size);
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x) taps[static_cast<std::size_t>(y + r) * size + (x + r)] = hard_disk_tap(x, y, radius);
    return Kernel2D::from_taps(size, std::move(taps), true);
}

Kernel2D soft_disk(double radius, double sigma, double phi) {
    if (!(radius >= 1.0)) throw std::invalid_argument("soft_disk: radius must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("soft_disk: sigma must be positive");
    const int r = support_radius(radius);
    const int size = 2 * r + 1;
    std::vector<double> taps(static_cast<std::size_t>(size) * size);
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x)
            taps[static_cast<std::size_t>(y + r) * size + (x + r)] = soft_disk_tap(x, y, radius, sigma, phi);
    return Kernel2D::from_taps(size, std::move(taps), true);
}

int growing_kernel_size(int l) {
    if (l >= 1 && l < 3) return 2 * l + 1;
    if (l >= 3 && l < 8) return 4 * (l - 3) + 7;
    if (l >= 8 && l < 11) return 6 * (l - 8) + 27;
    if (l >= 11 && l < 15) return 8 * (l - 11) + 45;
    throw std::out_of_range("growing_kernel_size: l must be in [1, 14]");
}

KernelSchedule growing_schedule() {
    KernelSchedule s;
    s.sampling = ScheduleSampling::growing;
    s.sizes.push_back(1);
    for (int l = 1; l < 15; ++l) s.sizes.push_back(growing_kernel_size(l));
    return s;
}

KernelSchedule uniform_schedule(int layers, int step) {
    if (layers < 2) throw std::invalid_argument("uniform_schedule: need at least 2 layers");
    if (step <= 0 || step % 2 != 0) throw std::invalid_argument("uniform_schedule: step must be positive and even");
    KernelSchedule s;
    s.sampling = ScheduleSampling::uniform;
    for (int i = 0; i < layers; ++i) s.sizes.push_back(3 + i * step);
    return s;
}

KernelSchedule scale_schedule(const KernelSchedule& schedule, double scale) {
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw std::invalid_argument("scale_schedule: scale must be >= 0");
    KernelSchedule s;
    s.sampling = ScheduleSampling::scaled;
    s.sizes.reserve(schedule.sizes.size());
    for (std::size_t i = 0; i < schedule.sizes.size(); ++i) {
        if (i == 0) {
            s.sizes.push_back(1);
            continue;
        }
        const double scaled = schedule.sizes[i] * scale;
        const int odd = 2 * static_cast<int>(std::lround((scaled - 1.0) / 2.0)) + 1;
        s.sizes.push_back(std::max(odd, std::max(1, s.sizes.back())));
    }
    return s;
}

KernelBank build_bank(const KernelSchedule& schedule, KernelShape shape, double sigma, double phi) {
    validate_schedule(schedule);
    if (!(sigma > 0.0)) throw std::invalid_argument("build_bank: sigma must be positive");
    KernelBank bank;
    bank.schedule = schedule;
    bank.shape = shape;
    bank.sigma = sigma;
    bank.phi = phi;
    bank.kernels.reserve(schedule.sizes.size());
    bank.kernels.push_back(Kernel2D::identity());
    for (std::size_t i = 1; i < schedule.sizes.size(); ++i) {
        const int side = schedule.sizes[i];
        if (side == 1) {
            bank.kernels.push_back(Kernel2D::identity());
            continue;
        }
        const double radius = (side - 1) / 2.0;
        bank.kernels.push_back(shape == KernelShape::hard ? hard_disk(radius) : soft_disk(radius, sigma, phi));
    }
    return bank;
}

KernelShape parse_kernel_shape(const std::string& name) {
    if (name == "hard") return KernelShape::hard;
    if (name == "soft") return KernelShape::soft;
    throw std::invalid_argument("unknown kernel shape '" + name + "' (expected hard or soft)");
}

std::string to_string(KernelShape shape) { return shape == KernelShape::hard ? "hard" : "soft"; }

}  // namespace softbokeh
