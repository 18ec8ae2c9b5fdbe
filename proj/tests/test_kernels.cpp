#include <gtest/gtest.h>

#include <cmath>

#include "softbokeh/kernels.hpp"

using namespace softbokeh;

TEST(HardDisk, RadiusOneIsPlusShape) {
    const Kernel2D k = hard_disk(1.0);
    ASSERT_EQ(k.size(), 3);
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const double expected = (dx != 0 && dy != 0) ? 0.0 : 0.2;
            EXPECT_DOUBLE_EQ(k.tap(dx, dy), expected) << dx << "," << dy;
        }
}

TEST(HardDisk, BoundaryTapsAreInside) {
    EXPECT_EQ(hard_disk_tap(3, 4, 5.0), 1.0);
    EXPECT_EQ(hard_disk_tap(4, 4, 5.0), 0.0);
    EXPECT_EQ(hard_disk(5.0).size(), 11);
}

TEST(SoftDisk, CenterTapMatchesScalarOracle) {
    EXPECT_NEAR(soft_disk_tap(0, 0, 5.0, 0.25, 0.5), 0.9999986290427931, 1e-15);
}

TEST(SoftDisk, TanhZeroCrossingGivesHalf) {
    // sigma * (r^2 - (r^2 + 2)) + phi = 0 at x^2 + y^2 = r^2 + 2.
    const double r = std::sqrt(23.0);  // 23 + 2 = 25 = 3^2 + 4^2
    EXPECT_NEAR(soft_disk_tap(3, 4, r, 0.25, 0.5), 0.5, 1e-12);
}

TEST(SoftDisk, LargeSigmaConvergesToHardOffTheCircle) {
    for (int y = -6; y <= 6; ++y)
        for (int x = -6; x <= 6; ++x) {
            if (x * x + y * y == 25) continue;
            EXPECT_NEAR(soft_disk_tap(x, y, 5.0, 1e4, 0.5), hard_disk_tap(x, y, 5.0), 1e-12);
        }
}

TEST(SoftDisk, PropertyMonotoneSymmetricNormalized) {
    for (int side : growing_schedule().sizes) {
        if (side == 1) continue;
        const double r = (side - 1) / 2.0;
        const Kernel2D k = soft_disk(r, 0.25, 0.5);
        EXPECT_NEAR(k.sum(), 1.0, 1e-6);
        const int R = k.radius();
        for (int y = -R; y <= R; ++y)
            for (int x = -R; x <= R; ++x) {
                EXPECT_EQ(k.tap(x, y), k.tap(-x, y));
                EXPECT_EQ(k.tap(x, y), k.tap(x, -y));
                EXPECT_EQ(k.tap(x, y), k.tap(y, x));
                if (x + 1 <= R && x >= 0) {
                    EXPECT_GE(k.tap(x, y), k.tap(x + 1, y));
                }
            }
    }
}

TEST(SoftDisk, SupportExceedsHardAtRadiusThree) {
    int soft_nonzero = 0;
    int hard_nonzero = 0;
    bool soft_only = false;
    for (int y = -3; y <= 3; ++y)
        for (int x = -3; x <= 3; ++x) {
            const bool s = soft_disk_tap(x, y, 3.0, 0.25, 0.5) > 0.0;
            const bool h = hard_disk_tap(x, y, 3.0) > 0.0;
            soft_nonzero += s;
            hard_nonzero += h;
            soft_only |= s && !h;
            EXPECT_TRUE(!h || s);
        }
    EXPECT_GT(soft_nonzero, hard_nonzero);
    EXPECT_TRUE(soft_only);
}

TEST(Schedule, GrowingMatchesPiecewiseTable) {
    const std::vector<int> expected{3, 5, 7, 11, 15, 19, 23, 27, 33, 39, 45, 53, 61, 69};
    for (int l = 1; l <= 14; ++l) EXPECT_EQ(growing_kernel_size(l), expected[l - 1]) << l;
    const KernelSchedule s = growing_schedule();
    ASSERT_EQ(s.layers(), 15);
    EXPECT_EQ(s.sizes[0], 1);
    EXPECT_EQ(std::vector<int>(s.sizes.begin() + 1, s.sizes.end()), expected);
}

TEST(Schedule, Uniform) {
    const KernelSchedule s15 = uniform_schedule(15, 4);
    ASSERT_EQ(s15.layers(), 15);
    EXPECT_EQ(s15.sizes.front(), 3);
    EXPECT_EQ(s15.sizes.back(), 59);
    EXPECT_EQ(uniform_schedule(2, 4).sizes, (std::vector<int>{3, 7}));
    EXPECT_EQ(uniform_schedule(4, 2).sizes, (std::vector<int>{3, 5, 7, 9}));
    EXPECT_THROW(uniform_schedule(1, 4), std::invalid_argument);
    EXPECT_THROW(uniform_schedule(4, 3), std::invalid_argument);
}

TEST(Schedule, ScaledKeepsOddAndMonotone) {
    const std::vector<int> doubled{1, 7, 11, 15, 23, 31, 39, 47, 55, 67, 79, 91, 107, 123, 139};
    EXPECT_EQ(scale_schedule(growing_schedule(), 2.0).sizes, doubled);
    EXPECT_EQ(scale_schedule(growing_schedule(), 1.0).sizes, growing_schedule().sizes);
    for (int v : scale_schedule(growing_schedule(), 0.0).sizes) EXPECT_EQ(v, 1);
    for (double s : {0.1, 0.3, 0.77, 1.5, 3.3}) {
        const auto sizes = scale_schedule(growing_schedule(), s).sizes;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            EXPECT_EQ(sizes[i] % 2, 1);
            if (i > 0) {
                EXPECT_GE(sizes[i], sizes[i - 1]);
            }
        }
    }
    EXPECT_THROW(scale_schedule(growing_schedule(), -1.0), std::invalid_argument);
}

TEST(Bank, GrowingSoftHasIdentityFirst) {
    const KernelBank bank = build_bank(growing_schedule(), KernelShape::soft, 0.25, 0.5);
    ASSERT_EQ(bank.layers(), 15);
    EXPECT_TRUE(bank[0].is_identity());
    for (int l = 1; l < 15; ++l) {
        EXPECT_EQ(bank[l].size(), growing_schedule().sizes[static_cast<std::size_t>(l)]);
        EXPECT_NEAR(bank[l].sum(), 1.0, 1e-6);
    }
}

TEST(Bank, UniformScheduleStillStartsInFocus) {
    const KernelBank bank = build_bank(uniform_schedule(4, 2), KernelShape::hard);
    EXPECT_TRUE(bank[0].is_identity());
    EXPECT_EQ(bank[1].size(), 5);
}

TEST(Bank, ShapeNames) {
    EXPECT_EQ(parse_kernel_shape("hard"), KernelShape::hard);
    EXPECT_EQ(to_string(parse_kernel_shape("soft")), "soft");
    EXPECT_THROW(parse_kernel_shape("gaussian"), std::invalid_argument);
}
