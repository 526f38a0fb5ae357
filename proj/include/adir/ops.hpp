#pragma once

#include <vector>

#include "adir/image.hpp"

namespace adir {

enum class ResizeMethod { Nearest, Bicubic };

// 2-D convolution stencil. Dimensions must be odd.
struct Kernel {
    int width = 0;
    int height = 0;
    std::vector<float> taps; // row-major, size = width * height

    float at(int x, int y) const { return taps[static_cast<size_t>(y) * width + x]; }
};

Kernel box_kernel(int side);
Kernel gaussian_kernel_1d(double sigma, bool horizontal);

// Geometric resampling. Output dimensions are exactly as requested, samples
// clamped to [0,1]. Total function, no error paths.
Image resize(const Image& image, int new_width, int new_height, ResizeMethod method);

// Rec. 601 luma: y = 0.299 R + 0.587 G + 0.114 B.
Plane to_luminance(const Image& image);

// Same-size convolution with replicate-edge padding, output clamped to [0,1].
// Throws EvenKernel if either kernel dimension is even.
Plane convolve(const Plane& plane, const Kernel& kernel);

// Unclamped variant used where signed residuals matter (feature extraction).
std::vector<float> convolve_raw(const Plane& plane, const Kernel& kernel);

// Per-channel RGB convolution, clamped.
Image convolve_rgb(const Image& image, const Kernel& kernel);

// Sliding-window minimum over a (2r+1)^2 square, replicate edges.
Plane min_filter(const Plane& plane, int radius);

// Separable Gaussian blur of every channel.
Image gaussian_blur(const Image& image, double sigma);

} // namespace adir
