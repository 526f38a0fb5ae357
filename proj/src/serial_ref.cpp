#include "adir/serial_ref.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "adir/error.hpp"

namespace adir::serial {

namespace {

inline int clampi(int v, int hi) {
    return v < 0 ? 0 : (v >= hi ? hi - 1 : v);
}

inline float cubic_weight(float t) {
    t = std::fabs(t);
    if (t <= 1.0f)
        return ((1.5f * t - 2.5f) * t) * t + 1.0f;
    if (t < 2.0f)
        return (((-0.5f * t + 2.5f) * t) - 4.0f) * t + 2.0f;
    return 0.0f;
}

} // namespace

Image resize(const Image& image, int new_width, int new_height, ResizeMethod method) {
    Image out(new_width, new_height);
    const int sw = image.width, sh = image.height;
    if (method == ResizeMethod::Nearest) {
        for (int y = 0; y < new_height; ++y) {
            int sy = clampi(static_cast<int>((2 * static_cast<int64_t>(y) + 1) * sh /
                                             (2 * static_cast<int64_t>(new_height))), sh);
            for (int x = 0; x < new_width; ++x) {
                int sx = clampi(static_cast<int>((2 * static_cast<int64_t>(x) + 1) * sw /
                                                 (2 * static_cast<int64_t>(new_width))), sw);
                for (int c = 0; c < 3; ++c)
                    out.samples[out.index(x, y, c)] = image.at(sx, sy, c);
            }
        }
        return out;
    }
    const float scale_x = static_cast<float>(sw) / new_width;
    const float scale_y = static_cast<float>(sh) / new_height;
    for (int y = 0; y < new_height; ++y) {
        float fy = (y + 0.5f) * scale_y - 0.5f;
        int iy = static_cast<int>(std::floor(fy));
        float ty = fy - iy;
        for (int x = 0; x < new_width; ++x) {
            float fx = (x + 0.5f) * scale_x - 0.5f;
            int ix = static_cast<int>(std::floor(fx));
            float tx = fx - ix;
            for (int c = 0; c < 3; ++c) {
                float acc = 0.0f;
                for (int j = 0; j < 4; ++j) {
                    float row = 0.0f;
                    for (int i = 0; i < 4; ++i)
                        row += cubic_weight(tx - (i - 1)) *
                               image.at(clampi(ix + i - 1, sw), clampi(iy + j - 1, sh), c);
                    acc += cubic_weight(ty - (j - 1)) * row;
                }
                out.samples[out.index(x, y, c)] = clamp01(acc);
            }
        }
    }
    return out;
}

Plane to_luminance(const Image& image) {
    Plane out(image.width, image.height);
    for (size_t i = 0; i < image.pixel_count(); ++i) {
        const float* px = &image.samples[i * 3];
        out.samples[i] = clamp01(0.299f * px[0] + 0.587f * px[1] + 0.114f * px[2]);
    }
    return out;
}

Plane convolve(const Plane& plane, const Kernel& kernel) {
    if (kernel.width % 2 == 0 || kernel.height % 2 == 0)
        throw EvenKernel("kernel dimensions must be odd");
    const int w = plane.width, h = plane.height;
    const int rx = kernel.width / 2, ry = kernel.height / 2;
    Plane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int ky = -ry; ky <= ry; ++ky)
                for (int kx = -rx; kx <= rx; ++kx)
                    acc += kernel.at(kx + rx, ky + ry) *
                           plane.at(clampi(x + kx, w), clampi(y + ky, h));
            out.samples[out.index(x, y)] = clamp01(acc);
        }
    return out;
}

Image convolve_rgb(const Image& image, const Kernel& kernel) {
    if (kernel.width % 2 == 0 || kernel.height % 2 == 0)
        throw EvenKernel("kernel dimensions must be odd");
    const int w = image.width, h = image.height;
    const int rx = kernel.width / 2, ry = kernel.height / 2;
    Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                float acc = 0.0f;
                for (int ky = -ry; ky <= ry; ++ky)
                    for (int kx = -rx; kx <= rx; ++kx)
                        acc += kernel.at(kx + rx, ky + ry) *
                               image.at(clampi(x + kx, w), clampi(y + ky, h), c);
                out.samples[out.index(x, y, c)] = clamp01(acc);
            }
    return out;
}

Plane min_filter(const Plane& plane, int radius) {
    const int w = plane.width, h = plane.height;
    Plane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float m = 1.0f;
            for (int ky = -radius; ky <= radius; ++ky)
                for (int kx = -radius; kx <= radius; ++kx)
                    m = std::min(m, plane.at(clampi(x + kx, w), clampi(y + ky, h)));
            out.samples[out.index(x, y)] = m;
        }
    return out;
}

} // namespace adir::serial
