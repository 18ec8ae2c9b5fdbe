#include "softbokeh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace softbokeh {

double psnr(const PlanarImage& a, const PlanarImage& b, double peak) {
    require_same_shape(a, b, "psnr");
    if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.samples().size(); ++i) {
        const double d = static_cast<double>(a.samples()[i]) - static_cast<double>(b.samples()[i]);
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(a.samples().size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const PlanarImage& a, const PlanarImage& b) {
    require_same_shape(a, b, "ssim");
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    constexpr double sigma = 1.5;

    int size = std::min({11, a.width(), a.height()});
    if (size % 2 == 0) --size;
    const int r = size / 2;
    std::vector<double> window(static_cast<std::size_t>(size) * size);
    double total = 0.0;
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x) {
            const double v = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
            window[static_cast<std::size_t>(y + r) * size + (x + r)] = v;
            total += v;
        }
    for (double& v : window) v /= total;

    const int w = a.width();
    const int h = a.height();
    double sum = 0.0;
    std::size_t count = 0;
    for (int c = 0; c < a.channels(); ++c) {
        const auto pa = a.plane(c);
        const auto pb = b.plane(c);
        for (int y = r; y + r < h; ++y) {
            for (int x = r; x + r < w; ++x) {
                double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
                for (int dy = -r; dy <= r; ++dy) {
                    for (int dx = -r; dx <= r; ++dx) {
                        const double wt = window[static_cast<std::size_t>(dy + r) * size + (dx + r)];
                        const std::size_t i = static_cast<std::size_t>(y + dy) * w + (x + dx);
                        const double va = pa[i];
                        const double vb = pb[i];
                        ma += wt * va;
                        mb += wt * vb;
                        saa += wt * va * va;
                        sbb += wt * vb * vb;
                        sab += wt * va * vb;
                    }
                }
                const double var_a = saa - ma * ma;
                const double var_b = sbb - mb * mb;
                const double cov = sab - ma * mb;
                sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                       ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
                ++count;
            }
        }
    }
    return sum / static_cast<double>(count);
}

double l1(const PlanarImage& a, const PlanarImage& b) {
    require_same_shape(a, b, "l1");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.samples().size(); ++i)
        sum += std::abs(static_cast<double>(a.samples()[i]) - static_cast<double>(b.samples()[i]));
    return sum / static_cast<double>(a.samples().size());
}

MetricRecord evaluate(const PlanarImage& result, const PlanarImage& reference) {
    return {psnr(result, reference), ssim(result, reference), l1(result, reference)};
}

MetricRecord MetricReport::mean() const {
    MetricRecord m;
    if (records.empty()) return m;
    for (const auto& [name, r] : records) {
        m.psnr += r.psnr;
        m.ssim += r.ssim;
        m.l1 += r.l1;
    }
    const double n = static_cast<double>(records.size());
    m.psnr /= n;
    m.ssim /= n;
    m.l1 /= n;
    return m;
}

}  // namespace softbokeh
