#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "softbokeh/image.hpp"

namespace softbokeh {

enum class ImageKind {
    rgb8,    ///< 8-bit PNG, gray or RGB(A); always loaded as 3 channels
    gray16,  ///< 8- or 16-bit gray PNG; loaded as 1 channel
    pfm,     ///< Portable float map, 1 or 3 channels, either endianness
};

class ImageIoError : public std::runtime_error {
public:
    enum class Kind { io_failure, malformed_file, unsupported_bit_depth };

    ImageIoError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

PlanarImage load_image(const std::filesystem::path& path, ImageKind kind);
PlanarImage decode_image(std::span<const std::uint8_t> bytes, ImageKind kind);

/// PFM when the extension is .pfm, 16-bit gray PNG otherwise. Used for
/// disparity maps.
PlanarImage load_disparity(const std::filesystem::path& path);
/// Same dispatch on content: PFM magic bytes select the PFM decoder.
PlanarImage decode_disparity(std::span<const std::uint8_t> bytes);

/// 8-bit PNG (gray for 1 channel, RGB for 3). Samples are clamped to [0,1]
/// and rounded to the nearest code value.
std::vector<std::uint8_t> encode_png8(const PlanarImage& img);
/// 16-bit gray PNG of a single-channel image, clamped to [0,1].
std::vector<std::uint8_t> encode_png16(const PlanarImage& img);
/// Little-endian PFM ("Pf" or "PF", scale -1), rows bottom to top.
std::vector<std::uint8_t> encode_pfm(const PlanarImage& img);

void save_png8(const PlanarImage& img, const std::filesystem::path& path);
void save_png16(const PlanarImage& img, const std::filesystem::path& path);
void save_pfm(const PlanarImage& img, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace softbokeh
