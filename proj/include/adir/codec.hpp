#pragma once

#include <filesystem>

#include "adir/image.hpp"

namespace adir {

// Decodes a PNG or binary PPM (P6, maxval 255) file into a float image.
// Throws MissingFile, UnsupportedFormat or CorruptData.
Image load_image(const std::filesystem::path& path);

// Encodes to P6 or PNG depending on the extension (.ppm / .png), samples
// quantized with round(v * 255). Throws IoFailure or UnsupportedFormat.
void save_image(const Image& image, const std::filesystem::path& path);

// 8-bit quantization used by both codecs.
inline uint8_t quantize8(float v) {
    float c = clamp01(v);
    return static_cast<uint8_t>(c * 255.0f + 0.5f);
}

} // namespace adir
