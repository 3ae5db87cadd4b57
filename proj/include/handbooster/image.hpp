// SPDX-License-Identifier: Apache-2.0
//
// 8-bit interleaved images and PNG file I/O.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace handbooster {

struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 (gray) or 3 (RGB)
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, 0) {}

    std::uint8_t& at(int x, int y, int c = 0) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    bool operator==(const Image&) const = default;
};

/// Throws DataError on I/O failure.
void write_png(const std::filesystem::path& path, const Image& img);
/// 16-bit grayscale.
void write_png16(const std::filesystem::path& path, int width, int height, const std::vector<std::uint16_t>& values);

/// Reads any PNG as 8-bit gray or RGB (alpha dropped, palettes expanded).
/// Throws DataError on missing or malformed files.
Image read_png(const std::filesystem::path& path);

}  // namespace handbooster
