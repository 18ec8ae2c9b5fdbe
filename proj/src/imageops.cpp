#include "softbokeh/imageops.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <string>

#include "softbokeh/parallel.hpp"

namespace softbokeh {

namespace {

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

void check_convolution_inputs(const PlanarImage& img, const Kernel2D& kernel) {
    if (!kernel.normalized() || std::abs(kernel.sum() - 1.0) > 1e-6)
        throw std::invalid_argument("convolve: kernel must be normalized");
    if (!img.all_finite())
        throw std::invalid_argument("convolve: input contains NaN or Inf");
}

// Direct quadruple loop; the oracle every faster path is checked against.
void convolve_plane_reference(std::span<const float> src, std::span<float> dst, int w, int h,
                              const Kernel2D& k) {
    const int r = k.radius();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                const int sy = clamp_index(y + dy, h);
                for (int dx = -r; dx <= r; ++dx) {
                    const int sx = clamp_index(x + dx, w);
                    acc += k.tap(dx, dy) * static_cast<double>(src[static_cast<std::size_t>(sy) * w + sx]);
                }
            }
            dst[static_cast<std::size_t>(y) * w + x] = static_cast<float>(acc);
        }
    }
}

std::vector<float> replicate_padded(std::span<const float> src, int w, int h, int r) {
    const int pw = w + 2 * r;
    const int ph = h + 2 * r;
    std::vector<float> padded(static_cast<std::size_t>(pw) * ph);
    for (int y = 0; y < ph; ++y) {
        const float* row = src.data() + static_cast<std::size_t>(clamp_index(y - r, h)) * w;
        float* out = padded.data() + static_cast<std::size_t>(y) * pw;
        for (int x = 0; x < pw; ++x) out[x] = row[clamp_index(x - r, w)];
    }
    return padded;
}

void convolve_plane_direct(std::span<const float> src, std::span<float> dst, int w, int h,
                           const Kernel2D& k) {
    const int r = k.radius();
    const int size = k.size();
    const int pw = w + 2 * r;
    const std::vector<float> padded = replicate_padded(src, w, h, r);
    const auto taps = k.taps();

    parallel_for(static_cast<std::size_t>(h), [&](std::size_t yi) {
        const int y = static_cast<int>(yi);
        std::vector<double> acc(static_cast<std::size_t>(w), 0.0);
        for (int ky = 0; ky < size; ++ky) {
            const float* row = padded.data() + static_cast<std::size_t>(y + ky) * pw;
            for (int kx = 0; kx < size; ++kx) {
                const double t = taps[static_cast<std::size_t>(ky) * size + kx];
                if (t == 0.0) continue;
                const float* s = row + kx;
                for (int x = 0; x < w; ++x) acc[x] += t * static_cast<double>(s[x]);
            }
        }
        float* out = dst.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) out[x] = static_cast<float>(acc[x]);
    });
}

int fft_friendly_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int v = m;
        for (int p : {2, 3, 5, 7})
            while (v % p == 0) v /= p;
        if (v == 1) return m;
    }
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t count) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * count));
    if (!p) throw std::bad_alloc();
    return FftwBuffer<T>(p);
}

struct FftPlans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
    ~FftPlans() {
        std::lock_guard lock(fftw_planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (inverse) fftw_destroy_plan(inverse);
    }
};

// Circular convolution on a replicate-padded canvas large enough that the
// wrap-around never reaches the valid output window.
void convolve_planes_fft(std::span<const std::span<const float>> srcs, std::span<const std::span<float>> dsts,
                         int w, int h, const Kernel2D& k) {
    const int r = k.radius();
    const int nw = fft_friendly_size(w + 2 * r);
    const int nh = fft_friendly_size(h + 2 * r);
    const std::size_t real_count = static_cast<std::size_t>(nw) * nh;
    const std::size_t complex_count = static_cast<std::size_t>(nh) * (nw / 2 + 1);

    auto real_buf = fftw_buffer<double>(real_count);
    auto spec_buf = fftw_buffer<fftw_complex>(complex_count);
    FftPlans plans;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plans.forward = fftw_plan_dft_r2c_2d(nh, nw, real_buf.get(), spec_buf.get(), FFTW_ESTIMATE);
        plans.inverse = fftw_plan_dft_c2r_2d(nh, nw, spec_buf.get(), real_buf.get(), FFTW_ESTIMATE);
    }
    if (!plans.forward || !plans.inverse) throw std::runtime_error("convolve: FFT planning failed");

    // Correlation kernel placed mirrored so a circular convolution evaluates it.
    std::fill(real_buf.get(), real_buf.get() + real_count, 0.0);
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            const int iy = ((-dy) % nh + nh) % nh;
            const int ix = ((-dx) % nw + nw) % nw;
            real_buf[static_cast<std::size_t>(iy) * nw + ix] = k.tap(dx, dy);
        }
    }
    fftw_execute_dft_r2c(plans.forward, real_buf.get(), spec_buf.get());
    std::vector<std::complex<double>> kernel_spectrum(complex_count);
    for (std::size_t i = 0; i < complex_count; ++i)
        kernel_spectrum[i] = {spec_buf[i][0], spec_buf[i][1]};

    const double scale = 1.0 / static_cast<double>(real_count);
    parallel_for(srcs.size(), [&](std::size_t p) {
        auto canvas = fftw_buffer<double>(real_count);
        auto spectrum = fftw_buffer<fftw_complex>(complex_count);
        std::fill(canvas.get(), canvas.get() + real_count, 0.0);
        const auto src = srcs[p];
        for (int y = 0; y < h + 2 * r; ++y) {
            const float* row = src.data() + static_cast<std::size_t>(clamp_index(y - r, h)) * w;
            double* out = canvas.get() + static_cast<std::size_t>(y) * nw;
            for (int x = 0; x < w + 2 * r; ++x) out[x] = row[clamp_index(x - r, w)];
        }
        fftw_execute_dft_r2c(plans.forward, canvas.get(), spectrum.get());
        for (std::size_t i = 0; i < complex_count; ++i) {
            const std::complex<double> v = std::complex<double>(spectrum[i][0], spectrum[i][1]) * kernel_spectrum[i];
            spectrum[i][0] = v.real();
            spectrum[i][1] = v.imag();
        }
        fftw_execute_dft_c2r(plans.inverse, spectrum.get(), canvas.get());
        const auto dst = dsts[p];
        for (int y = 0; y < h; ++y) {
            const double* row = canvas.get() + static_cast<std::size_t>(y + r) * nw + r;
            float* out = dst.data() + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) out[x] = static_cast<float>(row[x] * scale);
        }
    });
}

}  // namespace

PlanarImage resize_bilinear(const PlanarImage& img, int width, int height) {
    if (width < 1 || height < 1) throw std::invalid_argument("resize_bilinear: target size must be >= 1");
    const int sw = img.width();
    const int sh = img.height();
    PlanarImage out(width, height, img.channels());

    struct Tap {
        int i0, i1;
        double t;
    };
    auto taps_for = [](int dst_n, int src_n) {
        std::vector<Tap> taps(static_cast<std::size_t>(dst_n));
        const double ratio = static_cast<double>(src_n) / dst_n;
        for (int i = 0; i < dst_n; ++i) {
            const double s = std::clamp((i + 0.5) * ratio - 0.5, 0.0, static_cast<double>(src_n - 1));
            const int i0 = static_cast<int>(std::floor(s));
            const int i1 = std::min(i0 + 1, src_n - 1);
            taps[i] = {i0, i1, s - i0};
        }
        return taps;
    };
    const auto xt = taps_for(width, sw);
    const auto yt = taps_for(height, sh);

    for (int c = 0; c < img.channels(); ++c) {
        const auto src = img.plane(c);
        auto dst = out.plane(c);
        for (int y = 0; y < height; ++y) {
            const auto [y0, y1, ty] = yt[y];
            const float* r0 = src.data() + static_cast<std::size_t>(y0) * sw;
            const float* r1 = src.data() + static_cast<std::size_t>(y1) * sw;
            for (int x = 0; x < width; ++x) {
                const auto [x0, x1, tx] = xt[x];
                const double top = r0[x0] + (r0[x1] - static_cast<double>(r0[x0])) * tx;
                const double bottom = r1[x0] + (r1[x1] - static_cast<double>(r1[x0])) * tx;
                dst[static_cast<std::size_t>(y) * width + x] = static_cast<float>(top + (bottom - top) * ty);
            }
        }
    }
    return out;
}

std::vector<PlanarImage> convolve_many(std::span<const PlanarImage> images, const Kernel2D& kernel,
                                       ConvolutionMode mode) {
    std::vector<PlanarImage> outs;
    outs.reserve(images.size());
    if (images.empty()) return outs;
    const int w = images.front().width();
    const int h = images.front().height();
    for (const auto& img : images) {
        require_same_size(images.front(), img, "convolve");
        check_convolution_inputs(img, kernel);
        outs.emplace_back(w, h, img.channels());
    }

    if (kernel.is_identity()) {
        for (std::size_t i = 0; i < images.size(); ++i) outs[i] = images[i];
        return outs;
    }

    std::vector<std::span<const float>> srcs;
    std::vector<std::span<float>> dsts;
    for (std::size_t i = 0; i < images.size(); ++i) {
        for (int c = 0; c < images[i].channels(); ++c) {
            srcs.push_back(images[i].plane(c));
            dsts.push_back(outs[i].plane(c));
        }
    }

    if (mode == ConvolutionMode::reference) {
        for (std::size_t p = 0; p < srcs.size(); ++p) convolve_plane_reference(srcs[p], dsts[p], w, h, kernel);
    } else if (kernel.size() >= kFftKernelThreshold) {
        convolve_planes_fft(srcs, dsts, w, h, kernel);
    } else {
        for (std::size_t p = 0; p < srcs.size(); ++p) convolve_plane_direct(srcs[p], dsts[p], w, h, kernel);
    }
    return outs;
}

PlanarImage convolve(const PlanarImage& img, const Kernel2D& kernel, ConvolutionMode mode) {
    auto outs = convolve_many(std::span<const PlanarImage>(&img, 1), kernel, mode);
    return std::move(outs.front());
}

PlanarImage laplacian(const PlanarImage& img) {
    const int w = img.width();
    const int h = img.height();
    PlanarImage out(w, h, img.channels());
    for (int c = 0; c < img.channels(); ++c) {
        for (int y = 0; y < h; ++y) {
            const int yu = clamp_index(y - 1, h);
            const int yd = clamp_index(y + 1, h);
            for (int x = 0; x < w; ++x) {
                const int xl = clamp_index(x - 1, w);
                const int xr = clamp_index(x + 1, w);
                const double v = static_cast<double>(img.at(c, xl, y)) + img.at(c, xr, y) + img.at(c, x, yu) +
                                 img.at(c, x, yd) - 4.0 * img.at(c, x, y);
                out.at(c, x, y) = static_cast<float>(v);
            }
        }
    }
    return out;
}

PlanarImage laplacian_adjoint(const PlanarImage& img) {
    const int w = img.width();
    const int h = img.height();
    PlanarImage out(w, h, img.channels());
    for (int c = 0; c < img.channels(); ++c) {
        std::vector<double> acc(img.plane_size(), 0.0);
        for (int y = 0; y < h; ++y) {
            const int yu = clamp_index(y - 1, h);
            const int yd = clamp_index(y + 1, h);
            for (int x = 0; x < w; ++x) {
                const double e = img.at(c, x, y);
                const int xl = clamp_index(x - 1, w);
                const int xr = clamp_index(x + 1, w);
                acc[static_cast<std::size_t>(y) * w + x] -= 4.0 * e;
                acc[static_cast<std::size_t>(y) * w + xl] += e;
                acc[static_cast<std::size_t>(y) * w + xr] += e;
                acc[static_cast<std::size_t>(yu) * w + x] += e;
                acc[static_cast<std::size_t>(yd) * w + x] += e;
            }
        }
        auto dst = out.plane(c);
        for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<float>(acc[i]);
    }
    return out;
}

std::pair<PlanarImage, PlanarImage> gradients_xy(const PlanarImage& img) {
    const int w = img.width();
    const int h = img.height();
    PlanarImage gx(w, h, img.channels());
    PlanarImage gy(w, h, img.channels());
    for (int c = 0; c < img.channels(); ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (x + 1 < w) gx.at(c, x, y) = img.at(c, x + 1, y) - img.at(c, x, y);
                if (y + 1 < h) gy.at(c, x, y) = img.at(c, x, y + 1) - img.at(c, x, y);
            }
        }
    }
    return {std::move(gx), std::move(gy)};
}

Kernel2D gaussian_kernel(int radius) {
    if (radius < 0) throw std::invalid_argument("gaussian_kernel: radius must be >= 0");
    if (radius == 0) return Kernel2D::identity();
    const int size = 2 * radius + 1;
    const double sigma = radius / 2.0;
    std::vector<double> taps(static_cast<std::size_t>(size) * size);
    for (int y = -radius; y <= radius; ++y)
        for (int x = -radius; x <= radius; ++x)
            taps[static_cast<std::size_t>(y + radius) * size + (x + radius)] =
                std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
    return Kernel2D::from_taps(size, std::move(taps), true);
}

PlanarImage pad_replicate(const PlanarImage& img, int width, int height) {
    if (width < img.width() || height < img.height())
        throw std::invalid_argument("pad_replicate: target smaller than image");
    if (width == img.width() && height == img.height()) return img;
    PlanarImage out(width, height, img.channels());
    for (int c = 0; c < img.channels(); ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                out.at(c, x, y) = img.at(c, std::min(x, img.width() - 1), std::min(y, img.height() - 1));
    return out;
}

PlanarImage crop(const PlanarImage& img, int width, int height) {
    if (width > img.width() || height > img.height() || width < 1 || height < 1)
        throw std::invalid_argument("crop: invalid crop size");
    if (width == img.width() && height == img.height()) return img;
    PlanarImage out(width, height, img.channels());
    for (int c = 0; c < img.channels(); ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) out.at(c, x, y) = img.at(c, x, y);
    return out;
}

}  // namespace softbokeh
