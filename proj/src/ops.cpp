#include "adir/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "adir/error.hpp"

namespace adir {

namespace {

inline int clamp_index(int v, int hi) {
    return v < 0 ? 0 : (v >= hi ? hi - 1 : v);
}

// Catmull-Rom cubic (a = -0.5), the usual photographic bicubic.
inline float cubic_weight(float t) {
    t = std::fabs(t);
    if (t <= 1.0f)
        return ((1.5f * t - 2.5f) * t) * t + 1.0f;
    if (t < 2.0f)
        return (((-0.5f * t + 2.5f) * t) - 4.0f) * t + 2.0f;
    return 0.0f;
}

// Exact integer source index for nearest-neighbor: floor((2x+1)*src / (2*dst)).
inline int nearest_index(int x, int src, int dst) {
    int64_t v = (2 * static_cast<int64_t>(x) + 1) * src / (2 * static_cast<int64_t>(dst));
    return clamp_index(static_cast<int>(v), src);
}

} // namespace

Kernel box_kernel(int side) {
    Kernel k;
    k.width = side;
    k.height = side;
    k.taps.assign(static_cast<size_t>(side) * side, 1.0f / static_cast<float>(side * side));
    return k;
}

Kernel gaussian_kernel_1d(double sigma, bool horizontal) {
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<float> taps(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        taps[i + radius] = static_cast<float>(v);
        sum += v;
    }
    for (auto& t : taps)
        t = static_cast<float>(t / sum);
    Kernel k;
    k.width = horizontal ? 2 * radius + 1 : 1;
    k.height = horizontal ? 1 : 2 * radius + 1;
    k.taps = std::move(taps);
    return k;
}

Image resize(const Image& image, int new_width, int new_height, ResizeMethod method) {
    Image out(new_width, new_height);
    const int sw = image.width, sh = image.height;

    if (method == ResizeMethod::Nearest) {
        #pragma omp parallel for schedule(static)
        for (int y = 0; y < new_height; ++y) {
            int sy = nearest_index(y, sh, new_height);
            for (int x = 0; x < new_width; ++x) {
                int sx = nearest_index(x, sw, new_width);
                for (int c = 0; c < 3; ++c)
                    out.samples[out.index(x, y, c)] = image.at(sx, sy, c);
            }
        }
        return out;
    }

    const float scale_x = static_cast<float>(sw) / new_width;
    const float scale_y = static_cast<float>(sh) / new_height;
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < new_height; ++y) {
        float fy = (y + 0.5f) * scale_y - 0.5f;
        int iy = static_cast<int>(std::floor(fy));
        float ty = fy - iy;
        float wy[4];
        for (int j = 0; j < 4; ++j)
            wy[j] = cubic_weight(ty - (j - 1));
        for (int x = 0; x < new_width; ++x) {
            float fx = (x + 0.5f) * scale_x - 0.5f;
            int ix = static_cast<int>(std::floor(fx));
            float tx = fx - ix;
            float wx[4];
            for (int i = 0; i < 4; ++i)
                wx[i] = cubic_weight(tx - (i - 1));
            for (int c = 0; c < 3; ++c) {
                float acc = 0.0f;
                for (int j = 0; j < 4; ++j) {
                    int sy = clamp_index(iy + j - 1, sh);
                    float row = 0.0f;
                    for (int i = 0; i < 4; ++i) {
                        int sx = clamp_index(ix + i - 1, sw);
                        row += wx[i] * image.at(sx, sy, c);
                    }
                    acc += wy[j] * row;
                }
                out.samples[out.index(x, y, c)] = clamp01(acc);
            }
        }
    }
    return out;
}

Plane to_luminance(const Image& image) {
    Plane out(image.width, image.height);
    const size_t n = image.pixel_count();
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        const float* px = &image.samples[static_cast<size_t>(i) * 3];
        out.samples[static_cast<size_t>(i)] =
            clamp01(0.299f * px[0] + 0.587f * px[1] + 0.114f * px[2]);
    }
    return out;
}

std::vector<float> convolve_raw(const Plane& plane, const Kernel& kernel) {
    if (kernel.width % 2 == 0 || kernel.height % 2 == 0)
        throw EvenKernel("kernel dimensions must be odd");
    const int w = plane.width, h = plane.height;
    const int rx = kernel.width / 2, ry = kernel.height / 2;
    std::vector<float> out(static_cast<size_t>(w) * h);
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int ky = -ry; ky <= ry; ++ky) {
                int sy = clamp_index(y + ky, h);
                for (int kx = -rx; kx <= rx; ++kx) {
                    int sx = clamp_index(x + kx, w);
                    acc += kernel.at(kx + rx, ky + ry) * plane.at(sx, sy);
                }
            }
            out[static_cast<size_t>(y) * w + x] = acc;
        }
    }
    return out;
}

Plane convolve(const Plane& plane, const Kernel& kernel) {
    Plane out(plane.width, plane.height);
    std::vector<float> raw = convolve_raw(plane, kernel);
    for (size_t i = 0; i < raw.size(); ++i)
        out.samples[i] = clamp01(raw[i]);
    return out;
}

Image convolve_rgb(const Image& image, const Kernel& kernel) {
    if (kernel.width % 2 == 0 || kernel.height % 2 == 0)
        throw EvenKernel("kernel dimensions must be odd");
    const int w = image.width, h = image.height;
    const int rx = kernel.width / 2, ry = kernel.height / 2;
    Image out(w, h);
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc[3] = {0.0f, 0.0f, 0.0f};
            for (int ky = -ry; ky <= ry; ++ky) {
                int sy = clamp_index(y + ky, h);
                for (int kx = -rx; kx <= rx; ++kx) {
                    int sx = clamp_index(x + kx, w);
                    float kv = kernel.at(kx + rx, ky + ry);
                    const float* px = &image.samples[image.index(sx, sy, 0)];
                    acc[0] += kv * px[0];
                    acc[1] += kv * px[1];
                    acc[2] += kv * px[2];
                }
            }
            for (int c = 0; c < 3; ++c)
                out.samples[out.index(x, y, c)] = clamp01(acc[c]);
        }
    }
    return out;
}

Plane min_filter(const Plane& plane, int radius) {
    const int w = plane.width, h = plane.height;
    Plane tmp(w, h), out(w, h);
    // separable: horizontal pass then vertical pass
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float m = 1.0f;
            for (int k = -radius; k <= radius; ++k)
                m = std::min(m, plane.at(clamp_index(x + k, w), y));
            tmp.samples[tmp.index(x, y)] = m;
        }
    }
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float m = 1.0f;
            for (int k = -radius; k <= radius; ++k)
                m = std::min(m, tmp.at(x, clamp_index(y + k, h)));
            out.samples[out.index(x, y)] = m;
        }
    }
    return out;
}

Image gaussian_blur(const Image& image, double sigma) {
    Image tmp = convolve_rgb(image, gaussian_kernel_1d(sigma, true));
    return convolve_rgb(tmp, gaussian_kernel_1d(sigma, false));
}

} // namespace adir
