#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "softbokeh/imageops.hpp"
#include "softbokeh/kernels.hpp"
#include "softbokeh/parallel.hpp"
#include "test_util.hpp"

using namespace softbokeh;
using softbokeh::testing::max_abs_diff;
using softbokeh::testing::random_image;

TEST(PlanarImage, RejectsInvalidShapes) {
    EXPECT_THROW(PlanarImage(0, 4, 1), std::invalid_argument);
    EXPECT_THROW(PlanarImage(4, -1, 1), std::invalid_argument);
    EXPECT_THROW(PlanarImage(4, 4, 2), std::invalid_argument);
    EXPECT_NO_THROW(PlanarImage(4, 4, 3));
}

TEST(PlanarImage, PlanesAreContiguousPerChannel) {
    PlanarImage img(3, 2, 3);
    img.at(2, 1, 1) = 0.5f;
    EXPECT_EQ(img.plane(2)[4], 0.5f);
    EXPECT_EQ(img.plane_size(), 6u);
    EXPECT_EQ(img.samples().size(), 18u);
}

TEST(Kernel2D, ValidatesTaps) {
    EXPECT_THROW(Kernel2D::from_taps(2, {1, 1, 1, 1}, true), std::invalid_argument);
    EXPECT_THROW(Kernel2D::from_taps(3, {1, 1, 1, 1, -1, 1, 1, 1, 1}, true), std::invalid_argument);
    EXPECT_THROW(Kernel2D::from_taps(3, {1, 1}, true), std::invalid_argument);
    const Kernel2D k = Kernel2D::from_taps(3, {1, 1, 1, 1, 4, 1, 1, 1, 1}, true);
    EXPECT_NEAR(k.sum(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(k.tap(0, 0), 4.0 / 12.0);
}

TEST(ResizeBilinear, ConstantMapsToSameConstant) {
    const PlanarImage img = PlanarImage::constant(7, 5, 3, 0.3f);
    for (auto [w, h] : {std::pair{1, 1}, std::pair{3, 9}, std::pair{14, 10}, std::pair{20, 3}}) {
        const PlanarImage out = resize_bilinear(img, w, h);
        for (float v : out.samples()) EXPECT_FLOAT_EQ(v, 0.3f);
    }
}

TEST(ResizeBilinear, UpThenDownOfConstantIsIdentical) {
    const PlanarImage img = PlanarImage::constant(6, 4, 1, 0.3f);
    const PlanarImage round_trip = resize_bilinear(resize_bilinear(img, 12, 8), 6, 4);
    EXPECT_EQ(round_trip, img);
}

TEST(ResizeBilinear, RampDownsampleMatchesScalarOracle) {
    PlanarImage ramp(4, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) ramp.at(0, x, y) = static_cast<float>((y * 4 + x) / 15.0);
    const PlanarImage out = resize_bilinear(ramp, 2, 2);
    // tests/oracles/derive_values.py: per-pixel bilinear interpolation.
    EXPECT_NEAR(out.at(0, 0, 0), 0.16666666666666666, 1e-7);
    EXPECT_NEAR(out.at(0, 1, 0), 0.30000000000000004, 1e-7);
    EXPECT_NEAR(out.at(0, 0, 1), 0.7, 1e-7);
    EXPECT_NEAR(out.at(0, 1, 1), 0.8333333333333333, 1e-7);
}

TEST(ResizeBilinear, RejectsEmptyTarget) {
    EXPECT_THROW(resize_bilinear(PlanarImage(4, 4, 1), 0, 2), std::invalid_argument);
}

TEST(Convolve, IdentityKernelReturnsInput) {
    const PlanarImage img = random_image(9, 7, 3, 1);
    for (auto mode : {ConvolutionMode::reference, ConvolutionMode::optimized})
        EXPECT_EQ(convolve(img, Kernel2D::identity(), mode), img);
}

TEST(Convolve, ConstantSurvivesAnyNormalizedKernel) {
    const PlanarImage img = PlanarImage::constant(16, 12, 3, 0.7f);
    for (double r : {1.0, 3.0, 8.0, 20.0}) {
        for (auto mode : {ConvolutionMode::reference, ConvolutionMode::optimized}) {
            const PlanarImage out = convolve(img, soft_disk(r, 0.25, 0.5), mode);
            for (float v : out.samples()) EXPECT_NEAR(v, 0.7f, 1e-6);
        }
    }
}

TEST(Convolve, OptimizedMatchesReferenceOnSmallImage) {
    const PlanarImage img = random_image(8, 8, 3, 42);
    const Kernel2D k = soft_disk(2.0, 0.25, 0.5);
    ASSERT_EQ(k.size(), 5);
    EXPECT_LT(max_abs_diff(convolve(img, k, ConvolutionMode::optimized), convolve(img, k, ConvolutionMode::reference)),
              1e-5);
}

TEST(Convolve, PropertyOptimizedMatchesReferenceAcrossSizesAndPaths) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 40);
        const int h = 1 + static_cast<int>(rng() % 40);
        const double r = 1.0 + static_cast<double>(rng() % 12);
        const Kernel2D k = trial % 2 ? hard_disk(r) : soft_disk(r, 0.25, 0.5);
        const PlanarImage img = random_image(w, h, trial % 3 ? 3 : 1, rng());
        const double diff =
            max_abs_diff(convolve(img, k, ConvolutionMode::optimized), convolve(img, k, ConvolutionMode::reference));
        EXPECT_LT(diff, 1e-5) << w << "x" << h << " radius " << r;
    }
}

TEST(Convolve, KernelLargerThanImageUsesReplicateBorder) {
    PlanarImage img(3, 2, 1);
    img.at(0, 0, 0) = 1.0f;
    const Kernel2D k = soft_disk(9.0, 0.25, 0.5);
    const PlanarImage a = convolve(img, k, ConvolutionMode::optimized);
    const PlanarImage b = convolve(img, k, ConvolutionMode::reference);
    EXPECT_LT(max_abs_diff(a, b), 1e-5);
    EXPECT_GT(a.at(0, 0, 0), 0.0f);
}

TEST(Convolve, RejectsNanAndUnnormalizedKernels) {
    PlanarImage img(4, 4, 1);
    img.at(0, 1, 1) = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(convolve(img, soft_disk(1.0, 0.25, 0.5)), std::invalid_argument);
    const Kernel2D raw = Kernel2D::from_taps(3, std::vector<double>(9, 1.0), false);
    EXPECT_THROW(convolve(PlanarImage(4, 4, 1), raw), std::invalid_argument);
}

TEST(Convolve, InteriorMeanOfConstantRegionPreserved) {
    PlanarImage img = random_image(48, 48, 1, 3);
    for (int y = 12; y < 36; ++y)
        for (int x = 12; x < 36; ++x) img.at(0, x, y) = 0.4f;
    const PlanarImage out = convolve(img, hard_disk(4.0));
    double sum = 0.0;
    for (int y = 16; y < 32; ++y)
        for (int x = 16; x < 32; ++x) sum += out.at(0, x, y);
    EXPECT_NEAR(sum / 256.0, 0.4, 1e-6);
}

TEST(Convolve, ManySharesKernelAcrossImages) {
    const PlanarImage a = random_image(20, 17, 3, 10);
    const PlanarImage b = random_image(20, 17, 1, 11);
    const Kernel2D k = soft_disk(9.0, 0.25, 0.5);
    const PlanarImage inputs[] = {a, b};
    const auto outs = convolve_many(inputs, k);
    EXPECT_EQ(outs[0], convolve(a, k));
    EXPECT_EQ(outs[1], convolve(b, k));
}

TEST(Convolve, ResultIndependentOfThreadCount) {
    const PlanarImage img = random_image(64, 48, 3, 5);
    const Kernel2D small = soft_disk(3.0, 0.25, 0.5);
    const Kernel2D large = soft_disk(15.0, 0.25, 0.5);
    set_thread_count(1);
    const PlanarImage s1 = convolve(img, small);
    const PlanarImage l1 = convolve(img, large);
    set_thread_count(4);
    EXPECT_EQ(convolve(img, small), s1);
    EXPECT_EQ(convolve(img, large), l1);
    set_thread_count(0);
}

TEST(Laplacian, ConstantGivesZero) {
    const PlanarImage out = laplacian(PlanarImage::constant(6, 5, 3, 0.9f));
    for (float v : out.samples()) EXPECT_EQ(v, 0.0f);
}

TEST(Laplacian, LinearRampIsHarmonicInInterior) {
    PlanarImage ramp(8, 6, 1);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) ramp.at(0, x, y) = 0.05f * x + 0.03f * y;
    const PlanarImage out = laplacian(ramp);
    for (int y = 1; y < 5; ++y)
        for (int x = 1; x < 7; ++x) EXPECT_NEAR(out.at(0, x, y), 0.0f, 1e-6);
}

TEST(Laplacian, ImpulseReproducesStencil) {
    PlanarImage img(5, 5, 1);
    img.at(0, 2, 2) = 1.0f;
    const PlanarImage out = laplacian(img);
    EXPECT_EQ(out.at(0, 2, 2), -4.0f);
    EXPECT_EQ(out.at(0, 1, 2), 1.0f);
    EXPECT_EQ(out.at(0, 3, 2), 1.0f);
    EXPECT_EQ(out.at(0, 2, 1), 1.0f);
    EXPECT_EQ(out.at(0, 2, 3), 1.0f);
    EXPECT_EQ(out.at(0, 1, 1), 0.0f);
    double sum = 0.0;
    for (float v : out.samples()) sum += v;
    EXPECT_EQ(sum, 0.0);
}

TEST(Laplacian, AdjointSatisfiesInnerProductIdentity) {
    const PlanarImage u = random_image(9, 7, 1, 20);
    const PlanarImage v = random_image(9, 7, 1, 21);
    const PlanarImage lu = laplacian(u);
    const PlanarImage atv = laplacian_adjoint(v);
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t i = 0; i < u.samples().size(); ++i) {
        lhs += static_cast<double>(lu.samples()[i]) * v.samples()[i];
        rhs += static_cast<double>(u.samples()[i]) * atv.samples()[i];
    }
    EXPECT_NEAR(lhs, rhs, 1e-4);
}

TEST(Gradients, ConstantGivesZeros) {
    const auto [gx, gy] = gradients_xy(PlanarImage::constant(5, 5, 1, 0.2f));
    for (float v : gx.samples()) EXPECT_EQ(v, 0.0f);
    for (float v : gy.samples()) EXPECT_EQ(v, 0.0f);
}

TEST(Gradients, HorizontalRamp) {
    PlanarImage ramp(6, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x) ramp.at(0, x, y) = 0.1f * x;
    const auto [gx, gy] = gradients_xy(ramp);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 5; ++x) EXPECT_NEAR(gx.at(0, x, y), 0.1f, 1e-6);
        EXPECT_EQ(gx.at(0, 5, y), 0.0f);
    }
    for (float v : gy.samples()) EXPECT_EQ(v, 0.0f);
}

TEST(Gradients, CheckerboardHasUnitMagnitude) {
    PlanarImage board(6, 6, 1);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) board.at(0, x, y) = static_cast<float>((x + y) % 2);
    const auto [gx, gy] = gradients_xy(board);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) {
            EXPECT_EQ(std::abs(gx.at(0, x, y)), 1.0f);
            EXPECT_EQ(std::abs(gy.at(0, x, y)), 1.0f);
        }
}

TEST(PadCrop, RoundTrip) {
    const PlanarImage img = random_image(5, 3, 3, 9);
    const PlanarImage padded = pad_replicate(img, 6, 4);
    EXPECT_EQ(padded.at(1, 5, 3), img.at(1, 4, 2));
    EXPECT_EQ(crop(padded, 5, 3), img);
}

TEST(Parallel, EveryIndexVisitedOnceAndExceptionsPropagate) {
    set_thread_count(3);
    std::vector<int> hits(101, 0);
    parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, [](std::size_t i) {
        if (i == 7) throw std::runtime_error("boom");
    }), std::runtime_error);
    set_thread_count(0);
}
