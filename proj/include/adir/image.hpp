#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace adir {

inline float clamp01(float v) {
    if (!(v > 0.0f))
        return 0.0f; // also catches NaN
    return v < 1.0f ? v : 1.0f;
}

// Owned 3-channel RGB raster. Samples are row-major floats in [0,1];
// 8-bit only exists at the I/O boundary.
struct Image {
    int width = 0;
    int height = 0;
    static constexpr int channels = 3;
    std::vector<float> samples; // size = width * height * 3

    Image() = default;
    Image(int w, int h, float fill = 0.0f)
        : width(w), height(h), samples(static_cast<size_t>(w) * h * 3, clamp01(fill)) {}

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    size_t index(int x, int y, int c) const {
        return (static_cast<size_t>(y) * width + x) * 3 + c;
    }
    float at(int x, int y, int c) const { return samples[index(x, y, c)]; }
    void set(int x, int y, int c, float v) { samples[index(x, y, c)] = clamp01(v); }

    bool same_dims(const Image& other) const {
        return width == other.width && height == other.height;
    }
};

// Single-channel float plane, used for luminance and feature intermediates.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<float> samples; // size = width * height

    Plane() = default;
    Plane(int w, int h, float fill = 0.0f)
        : width(w), height(h), samples(static_cast<size_t>(w) * h, clamp01(fill)) {}

    size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    float at(int x, int y) const { return samples[index(x, y)]; }
    void set(int x, int y, float v) { samples[index(x, y)] = clamp01(v); }
};

} // namespace adir
