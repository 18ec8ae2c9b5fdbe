#include "softbokeh/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <csetjmp>
#include <fstream>
#include <iterator>
#include <sstream>

namespace softbokeh {

namespace {

using Kind = ImageIoError::Kind;

// libpng reports errors through longjmp; everything that owns memory is
// constructed before setjmp so no destructor is skipped.
struct PngErrorState {
    std::jmp_buf jump;
    char message[256] = {};
};

void png_error_handler(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof(state->message), "%s", msg ? msg : "libpng error");
    std::longjmp(state->jump, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct MemoryReader {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
    if (reader->offset + count > reader->bytes.size()) {
        png_error(png, "unexpected end of PNG data");
    }
    std::memcpy(out, reader->bytes.data() + reader->offset, count);
    reader->offset += count;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + count);
}

void png_flush_noop(png_structp) {}

struct DecodedPng {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;
    std::vector<std::uint8_t> pixels;  // big-endian samples for 16-bit
};

DecodedPng decode_png_raw(std::span<const std::uint8_t> bytes, ImageKind kind) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        throw ImageIoError(Kind::malformed_file, "not a PNG file");

    DecodedPng result;
    std::vector<png_bytep> rows;
    MemoryReader reader{bytes, 0};
    PngErrorState state;
    bool unsupported_depth = false;
    bool wrong_color = false;

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, png_error_handler, png_warning_handler);
    if (!png) throw ImageIoError(Kind::io_failure, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ImageIoError(Kind::io_failure, "png_create_info_struct failed");
    }

    if (setjmp(state.jump)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageIoError(Kind::malformed_file, std::string("malformed PNG: ") + state.message);
    }

    png_set_read_fn(png, &reader, png_read_from_memory);
    png_read_info(png, info);
    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color_type = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    if (kind == ImageKind::rgb8) {
        if (depth > 8) {
            unsupported_depth = true;
        } else {
            if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
            if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
            if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
            if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
            if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
            result.channels = 3;
            result.bit_depth = 8;
        }
    } else {
        if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
            wrong_color = true;
        } else {
            if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
            if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
            result.channels = 1;
            result.bit_depth = depth == 16 ? 16 : 8;
        }
    }

    if (!unsupported_depth && !wrong_color) {
        png_read_update_info(png, info);
        const std::size_t rowbytes = png_get_rowbytes(png, info);
        result.width = static_cast<int>(width);
        result.height = static_cast<int>(height);
        result.pixels.resize(rowbytes * height);
        rows.resize(height);
        for (png_uint_32 y = 0; y < height; ++y) rows[y] = result.pixels.data() + y * rowbytes;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);

    if (unsupported_depth)
        throw ImageIoError(Kind::unsupported_bit_depth, "rgb8 images must have 8-bit samples");
    if (wrong_color) throw ImageIoError(Kind::malformed_file, "expected a grayscale PNG");
    return result;
}

PlanarImage png_to_planar(const DecodedPng& raw) {
    PlanarImage img(raw.width, raw.height, raw.channels);
    const std::size_t bytes_per_sample = raw.bit_depth == 16 ? 2 : 1;
    const double max_code = raw.bit_depth == 16 ? 65535.0 : 255.0;
    const std::size_t stride = static_cast<std::size_t>(raw.width) * raw.channels * bytes_per_sample;
    for (int y = 0; y < raw.height; ++y) {
        const std::uint8_t* row = raw.pixels.data() + y * stride;
        for (int x = 0; x < raw.width; ++x) {
            for (int c = 0; c < raw.channels; ++c) {
                const std::size_t i = (static_cast<std::size_t>(x) * raw.channels + c) * bytes_per_sample;
                const unsigned code = bytes_per_sample == 2 ? (unsigned(row[i]) << 8) | row[i + 1] : row[i];
                img.at(c, x, y) = static_cast<float>(code / max_code);
            }
        }
    }
    return img;
}

std::vector<std::uint8_t> encode_png(int width, int height, int channels, int bit_depth,
                                     const std::vector<std::uint8_t>& pixels) {
    std::vector<std::uint8_t> out;
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
    for (int y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(pixels.data() + y * stride);
    PngErrorState state;

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state, png_error_handler, png_warning_handler);
    if (!png) throw ImageIoError(Kind::io_failure, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw ImageIoError(Kind::io_failure, "png_create_info_struct failed");
    }
    if (setjmp(state.jump)) {
        png_destroy_write_struct(&png, &info);
        throw ImageIoError(Kind::io_failure, std::string("PNG encoding failed: ") + state.message);
    }
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

void require_finite(const PlanarImage& img, const char* what) {
    if (!img.all_finite()) throw std::invalid_argument(std::string(what) + ": image contains NaN or Inf");
}

float read_float(const std::uint8_t* p, bool little_endian) {
    std::uint32_t bits = 0;
    if (little_endian)
        bits = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
    else
        bits = std::uint32_t(p[3]) | (std::uint32_t(p[2]) << 8) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[0]) << 24);
    return std::bit_cast<float>(bits);
}

PlanarImage decode_pfm(std::span<const std::uint8_t> bytes) {
    // Header: "PF"|"Pf" <ws> width <ws> height <ws> scale <single ws> data
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    };
    auto read_token = [&] {
        skip_space();
        std::string token;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) token.push_back(static_cast<char>(bytes[pos++]));
        return token;
    };

    const std::string magic = read_token();
    int channels = 0;
    if (magic == "PF")
        channels = 3;
    else if (magic == "Pf")
        channels = 1;
    else
        throw ImageIoError(Kind::malformed_file, "PFM: bad magic '" + magic + "'");

    int width = 0;
    int height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(read_token());
        height = std::stoi(read_token());
        scale = std::stod(read_token());
    } catch (const std::exception&) {
        throw ImageIoError(Kind::malformed_file, "PFM: unreadable header");
    }
    if (width <= 0 || height <= 0 || scale == 0.0 || !std::isfinite(scale))
        throw ImageIoError(Kind::malformed_file, "PFM: invalid header values");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw ImageIoError(Kind::malformed_file, "PFM: truncated header");
    ++pos;

    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() - pos < count * 4) throw ImageIoError(Kind::malformed_file, "PFM: truncated pixel data");

    const bool little_endian = scale < 0.0;
    PlanarImage img(width, height, channels);
    const std::uint8_t* data = bytes.data() + pos;
    for (int row = 0; row < height; ++row) {
        const int y = height - 1 - row;
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                const std::size_t i = ((static_cast<std::size_t>(row) * width + x) * channels + c) * 4;
                img.at(c, x, y) = read_float(data + i, little_endian);
            }
        }
    }
    return img;
}

bool has_pfm_magic(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == 'f' || bytes[1] == 'F');
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError(Kind::io_failure, "cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw ImageIoError(Kind::io_failure, "read error on '" + path.string() + "'");
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ImageIoError(Kind::io_failure, "cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageIoError(Kind::io_failure, "write error on '" + path.string() + "'");
}

PlanarImage decode_image(std::span<const std::uint8_t> bytes, ImageKind kind) {
    if (kind == ImageKind::pfm) return decode_pfm(bytes);
    return png_to_planar(decode_png_raw(bytes, kind));
}

PlanarImage load_image(const std::filesystem::path& path, ImageKind kind) {
    return decode_image(read_file_bytes(path), kind);
}

PlanarImage decode_disparity(std::span<const std::uint8_t> bytes) {
    const PlanarImage img = decode_image(bytes, has_pfm_magic(bytes) ? ImageKind::pfm : ImageKind::gray16);
    return img.channels() == 1 ? img : img.channel(0);
}

PlanarImage load_disparity(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    const PlanarImage img = load_image(path, ext == ".pfm" ? ImageKind::pfm : ImageKind::gray16);
    return img.channels() == 1 ? img : img.channel(0);
}

std::vector<std::uint8_t> encode_png8(const PlanarImage& img) {
    require_finite(img, "encode_png8");
    const int channels = img.channels();
    std::vector<std::uint8_t> pixels(img.plane_size() * channels);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < channels; ++c) {
                const double v = std::clamp(static_cast<double>(img.at(c, x, y)), 0.0, 1.0);
                pixels[(static_cast<std::size_t>(y) * img.width() + x) * channels + c] =
                    static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
    return encode_png(img.width(), img.height(), channels, 8, pixels);
}

std::vector<std::uint8_t> encode_png16(const PlanarImage& img) {
    require_finite(img, "encode_png16");
    if (img.channels() != 1) throw std::invalid_argument("encode_png16: expects a single-channel image");
    std::vector<std::uint8_t> pixels(img.plane_size() * 2);
    for (std::size_t i = 0; i < img.plane_size(); ++i) {
        const double v = std::clamp(static_cast<double>(img.plane(0)[i]), 0.0, 1.0);
        const auto code = static_cast<std::uint16_t>(std::lround(v * 65535.0));
        pixels[2 * i] = static_cast<std::uint8_t>(code >> 8);
        pixels[2 * i + 1] = static_cast<std::uint8_t>(code & 0xff);
    }
    return encode_png(img.width(), img.height(), 1, 16, pixels);
}

std::vector<std::uint8_t> encode_pfm(const PlanarImage& img) {
    std::ostringstream header;
    header << (img.channels() == 3 ? "PF" : "Pf") << "\n" << img.width() << " " << img.height() << "\n-1.0\n";
    const std::string h = header.str();
    std::vector<std::uint8_t> out(h.begin(), h.end());
    out.reserve(out.size() + img.plane_size() * img.channels() * 4);
    for (int row = 0; row < img.height(); ++row) {
        const int y = img.height() - 1 - row;
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) {
                const auto bits = std::bit_cast<std::uint32_t>(img.at(c, x, y));
                for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>((bits >> (8 * b)) & 0xff));
            }
    }
    return out;
}

void save_png8(const PlanarImage& img, const std::filesystem::path& path) { write_file_bytes(path, encode_png8(img)); }
void save_png16(const PlanarImage& img, const std::filesystem::path& path) { write_file_bytes(path, encode_png16(img)); }
void save_pfm(const PlanarImage& img, const std::filesystem::path& path) { write_file_bytes(path, encode_pfm(img)); }

}  // namespace softbokeh
