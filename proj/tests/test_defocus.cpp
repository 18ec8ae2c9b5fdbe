#include <gtest/gtest.h>

#include <cmath>

#include "softbokeh/defocus.hpp"
#include "test_util.hpp"

using namespace softbokeh;

namespace {

PlanarImage flat(int w, int h, float v) { return PlanarImage::constant(w, h, 1, v); }

DefocusMap defocus_of(const PlanarImage& raster) { return DefocusMap{raster}; }

}  // namespace

TEST(SignedDefocus, Subtraction) {
    EXPECT_TRUE(softbokeh::testing::all_near(signed_defocus(flat(4, 3, 0.7f), 0.7).raster, 0.0f, 0.0));
    EXPECT_TRUE(softbokeh::testing::all_near(signed_defocus(flat(4, 3, 1.0f), 0.0).raster, 1.0f, 0.0));
    EXPECT_TRUE(softbokeh::testing::all_near(signed_defocus(flat(4, 3, 0.25f), 0.75).raster, -0.5f, 0.0));
}

TEST(SignedDefocus, RejectsInvalidInput) {
    EXPECT_THROW(signed_defocus(PlanarImage(2, 2, 3), 0.5), std::invalid_argument);
    EXPECT_THROW(signed_defocus(flat(2, 2, 1.5f), 0.5), std::invalid_argument);
    EXPECT_THROW(signed_defocus(flat(2, 2, 0.5f), -0.1), std::invalid_argument);
}

TEST(DefocusMagnitude, ZeroStaysZeroInEveryMode) {
    const SignedDefocus sd{flat(3, 3, 0.0f), 0.4};
    for (auto mode : {DefocusNormalization::fixed_range, DefocusNormalization::per_image_max,
                      DefocusNormalization::none})
        EXPECT_TRUE(softbokeh::testing::all_near(defocus_magnitude(sd, mode).raster, 0.0f, 0.0));
}

TEST(DefocusMagnitude, FixedRangeMatchesScalarOracle) {
    const SignedDefocus sd = signed_defocus(flat(3, 3, 0.25f), 0.75);
    EXPECT_TRUE(softbokeh::testing::all_near(defocus_magnitude(sd).raster, 0.6666666666666666, 1e-7));
}

TEST(DefocusMagnitude, PerImageMaxReachesOne) {
    PlanarImage ramp(8, 1, 1);
    for (int x = 0; x < 8; ++x) ramp.at(0, x, 0) = 0.1f * x - 0.3f;
    const DefocusMap d = defocus_magnitude(SignedDefocus{ramp, 0.3}, DefocusNormalization::per_image_max);
    EXPECT_EQ(d.raster.max_value(), 1.0f);
}

TEST(DefocusMagnitude, PropertyAlwaysInUnitRange) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const PlanarImage disp = softbokeh::testing::random_image(16, 9, 1, seed);
        const double f = static_cast<double>(seed) / 7.0;
        for (auto mode : {DefocusNormalization::fixed_range, DefocusNormalization::per_image_max,
                          DefocusNormalization::none}) {
            const DefocusMap d = defocus_magnitude(signed_defocus(disp, f), mode);
            EXPECT_GE(d.raster.min_value(), 0.0f);
            EXPECT_LE(d.raster.max_value(), 1.0f);
        }
    }
}

TEST(BinaryMask, Thresholding) {
    EXPECT_TRUE(softbokeh::testing::all_near(binary_mask(defocus_of(flat(4, 4, 0.0f)), 0.25), 1.0f, 0.0));
    EXPECT_TRUE(softbokeh::testing::all_near(binary_mask(defocus_of(flat(4, 4, 0.25f)), 0.25), 0.0f, 0.0));
    PlanarImage halves(6, 2, 1);
    for (int y = 0; y < 2; ++y)
        for (int x = 3; x < 6; ++x) halves.at(0, x, y) = 1.0f;
    const PlanarImage m = binary_mask(defocus_of(halves), 0.25);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 6; ++x) EXPECT_EQ(m.at(0, x, y), x < 3 ? 1.0f : 0.0f);
}

TEST(LayerMask, ScalarOracleValues) {
    EXPECT_NEAR(layer_mask_value(7.0 / 15, 7, 15, 100.0), 0.9999983804058308, 1e-12);
    EXPECT_NEAR(layer_mask_value(8.0 / 15, 7, 15, 100.0), 0.5, 1e-12);
    EXPECT_NEAR(layer_mask_value(6.0 / 15, 7, 15, 100.0), 0.5, 1e-12);
    EXPECT_NEAR(layer_mask_value(9.0 / 15, 7, 15, 100.0), 1.6195941692220828e-06, 1e-15);
}

TEST(LayerMask, FarLayersStayPositive) {
    EXPECT_GT(layer_mask_value(1.0, 1, 15, 100.0), 0.0);
    const auto masks = layer_masks(defocus_of(flat(2, 2, 1.0f)), 15, 1000.0);
    ASSERT_EQ(masks.size(), 15u);
    for (const auto& m : masks) {
        EXPECT_GT(m.raster.min_value(), 0.0f);
        EXPECT_LT(m.raster.max_value(), 1.0f);
    }
    EXPECT_EQ(masks.front().layer, 1);
    EXPECT_EQ(masks.back().layer, 15);
}

TEST(LayerMask, NearestLayerTiesGoLow) {
    EXPECT_EQ(nearest_layer(0.0, 15), 1);
    EXPECT_EQ(nearest_layer(1.0, 15), 15);
    EXPECT_EQ(nearest_layer(7.0 / 15, 15), 7);
    EXPECT_EQ(nearest_layer(7.5 / 15, 15), 7);
    EXPECT_EQ(nearest_layer(7.6 / 15, 15), 8);
}

TEST(Smoothness, ConstantDefocusIsZero) {
    const PlanarImage img = softbokeh::testing::random_image(16, 16, 3, 4);
    for (int s : {1, 2, 4}) EXPECT_EQ(defocus_smoothness(defocus_of(flat(16, 16, 0.3f)), img, s), 0.0);
}

TEST(Smoothness, EdgeAwareWeighting) {
    PlanarImage step(16, 16, 1);
    PlanarImage edge(16, 16, 3);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 16; ++y)
            for (int x = 8; x < 16; ++x) {
                step.at(0, x, y) = 1.0f;
                edge.at(c, x, y) = 1.0f;
            }
    const PlanarImage flat_img = PlanarImage::constant(16, 16, 3, 0.5f);
    EXPECT_LT(defocus_smoothness(defocus_of(step), edge, 1), defocus_smoothness(defocus_of(step), flat_img, 1));
}

TEST(Smoothness, CraftedInputMatchesSummationOracle) {
    PlanarImage d(8, 8, 1);
    PlanarImage img(8, 8, 3);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            d.at(0, x, y) = static_cast<float>(((3 * x + 5 * y) % 7) / 7.0);
            for (int c = 0; c < 3; ++c) img.at(c, x, y) = static_cast<float>(((x + 2 * y + c) % 5) / 4.0);
        }
    EXPECT_NEAR(defocus_smoothness(defocus_of(d), img, 2), 0.1552410226259695, 1e-10);
}

TEST(Normalization, Names) {
    EXPECT_EQ(parse_normalization("per_image_max"), DefocusNormalization::per_image_max);
    EXPECT_EQ(to_string(DefocusNormalization::none), "none");
    EXPECT_THROW(parse_normalization("bogus"), std::invalid_argument);
}

TEST(LayerMask, DominantLayerOwnsTheBandBelowItsCenter) {
    EXPECT_EQ(dominant_layer(0.0, 15, 100.0), 1);
    EXPECT_EQ(dominant_layer(6.5 / 15, 15, 100.0), 7);
    EXPECT_EQ(dominant_layer(0.7f, 15, 100.0), 11);
    for (int i = 1; i <= 100; ++i) {
        const double d = i / 100.0;
        const double frac = d * 15 - std::floor(d * 15);
        if (frac < 0.05 || frac > 0.95) continue;
        EXPECT_EQ(dominant_layer(d, 15, 100.0), static_cast<int>(std::ceil(d * 15))) << d;
    }
}
