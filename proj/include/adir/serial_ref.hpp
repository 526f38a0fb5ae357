#pragma once

#include "adir/image.hpp"
#include "adir/ops.hpp"

// Plain single-threaded reference versions of the parallel raster kernels.
// Kept for correctness tests (parity with the OpenMP paths) and for the
// kernel_bench comparison tool. Not used by the pipeline itself.
namespace adir::serial {

Image resize(const Image& image, int new_width, int new_height, ResizeMethod method);
Plane to_luminance(const Image& image);
Plane convolve(const Plane& plane, const Kernel& kernel);
Image convolve_rgb(const Image& image, const Kernel& kernel);
Plane min_filter(const Plane& plane, int radius);

} // namespace adir::serial
