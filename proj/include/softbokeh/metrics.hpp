#pragma once

#include <map>
#include <string>

#include "softbokeh/image.hpp"

namespace softbokeh {

/// 10 log10(peak^2 / MSE) with the MSE taken over every channel and pixel.
/// Identical images give +infinity.
double psnr(const PlanarImage& a, const PlanarImage& b, double peak = 1.0);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, averaged over channels and all positions where the window
/// fits. Images smaller than the window use the largest odd window that fits.
double ssim(const PlanarImage& a, const PlanarImage& b);

/// Mean absolute difference over channels and pixels.
double l1(const PlanarImage& a, const PlanarImage& b);

struct MetricRecord {
    double psnr = 0.0;
    double ssim = 0.0;
    double l1 = 0.0;
};

MetricRecord evaluate(const PlanarImage& result, const PlanarImage& reference);

struct MetricReport {
    std::map<std::string, MetricRecord> records;

    void add(const std::string& name, const MetricRecord& record) { records[name] = record; }
    /// Arithmetic mean of each field; an infinite PSNR keeps the mean infinite.
    MetricRecord mean() const;
};

}  // namespace softbokeh
