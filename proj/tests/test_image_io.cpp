#include <gtest/gtest.h>

#include <png.h>

#include <cstring>

#include "softbokeh/image_io.hpp"
#include "test_util.hpp"

using namespace softbokeh;

namespace {

/// Minimal libpng writer so decoding is checked against an independent encoder.
std::vector<std::uint8_t> raw_png(int w, int h, int color_type, int bit_depth, const std::vector<std::uint8_t>& rows) {
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t len) {
            auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
            v->insert(v->end(), data, data + len);
        },
        nullptr);
    png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = rows.size() / static_cast<std::size_t>(h);
    for (int y = 0; y < h; ++y) png_write_row(png, const_cast<png_bytep>(rows.data() + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace

TEST(ImageIo, WhitePngLoadsAsOnes) {
    const auto bytes = raw_png(2, 2, PNG_COLOR_TYPE_RGB, 8, std::vector<std::uint8_t>(12, 255));
    const PlanarImage img = decode_image(bytes, ImageKind::rgb8);
    EXPECT_EQ(img.channels(), 3);
    for (float v : img.samples()) EXPECT_EQ(v, 1.0f);
}

TEST(ImageIo, GrayPngExpandsToThreeChannels) {
    const auto bytes = raw_png(2, 1, PNG_COLOR_TYPE_GRAY, 8, {0, 51});
    const PlanarImage img = decode_image(bytes, ImageKind::rgb8);
    ASSERT_EQ(img.channels(), 3);
    for (int c = 0; c < 3; ++c) EXPECT_FLOAT_EQ(img.at(c, 1, 0), 0.2f);
}

TEST(ImageIo, Gray16LinearMapping) {
    const auto bytes = raw_png(1, 1, PNG_COLOR_TYPE_GRAY, 16, {0x80, 0x00});
    const PlanarImage img = decode_image(bytes, ImageKind::gray16);
    ASSERT_EQ(img.channels(), 1);
    EXPECT_NEAR(img.at(0, 0, 0), 32768.0 / 65535.0, 1e-7);
}

TEST(ImageIo, PfmPassesNegativeValuesThrough) {
    PlanarImage img(3, 2, 1);
    img.at(0, 1, 1) = -0.5f;
    img.at(0, 2, 0) = 7.25f;
    const PlanarImage back = decode_image(encode_pfm(img), ImageKind::pfm);
    EXPECT_EQ(back, img);
    EXPECT_EQ(decode_disparity(encode_pfm(img)), img);
}

TEST(ImageIo, PfmBigEndianAndColor) {
    // Hand-built big-endian 1x1 color PFM (positive scale).
    std::string header = "PF\n1 1\n1.0\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (float v : {0.25f, 0.5f, 2.0f}) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        for (int s = 24; s >= 0; s -= 8) bytes.push_back(static_cast<std::uint8_t>(bits >> s));
    }
    const PlanarImage img = decode_image(bytes, ImageKind::pfm);
    ASSERT_EQ(img.channels(), 3);
    EXPECT_EQ(img.at(0, 0, 0), 0.25f);
    EXPECT_EQ(img.at(2, 0, 0), 2.0f);
}

TEST(ImageIo, Png8RoundTripWithinQuantization) {
    const PlanarImage img = softbokeh::testing::random_image(7, 5, 3, 2);
    const PlanarImage back = decode_image(encode_png8(img), ImageKind::rgb8);
    EXPECT_LE(softbokeh::testing::max_abs_diff(img, back), 0.5 / 255.0 + 1e-7);
}

TEST(ImageIo, Png16RoundTripWithinQuantization) {
    const PlanarImage img = softbokeh::testing::random_image(7, 5, 1, 3);
    const PlanarImage back = decode_disparity(encode_png16(img));
    EXPECT_LE(softbokeh::testing::max_abs_diff(img, back), 0.5 / 65535.0 + 1e-7);
}

TEST(ImageIo, FilesRoundTrip) {
    const auto dir = softbokeh::testing::scratch_dir("image_io");
    const PlanarImage img = softbokeh::testing::random_image(4, 4, 1, 5);
    save_pfm(img, dir / "d.pfm");
    save_png16(img, dir / "d.png");
    EXPECT_EQ(load_disparity(dir / "d.pfm"), img);
    EXPECT_EQ(load_disparity(dir / "d.png").channels(), 1);
}

TEST(ImageIo, ErrorsAreTyped) {
    const std::vector<std::uint8_t> junk{1, 2, 3, 4};
    try {
        decode_image(junk, ImageKind::rgb8);
        FAIL();
    } catch (const ImageIoError& e) {
        EXPECT_EQ(e.kind(), ImageIoError::Kind::malformed_file);
    }
    try {
        load_image("/nonexistent/nope.png", ImageKind::rgb8);
        FAIL();
    } catch (const ImageIoError& e) {
        EXPECT_EQ(e.kind(), ImageIoError::Kind::io_failure);
    }
    const auto deep = raw_png(1, 1, PNG_COLOR_TYPE_RGB, 16, std::vector<std::uint8_t>(6, 0x40));
    try {
        decode_image(deep, ImageKind::rgb8);
        FAIL();
    } catch (const ImageIoError& e) {
        EXPECT_EQ(e.kind(), ImageIoError::Kind::unsupported_bit_depth);
    }
}

TEST(ImageIo, EncodersRejectWrongChannelCount) {
    EXPECT_THROW(encode_png16(PlanarImage(2, 2, 3)), std::invalid_argument);
}
