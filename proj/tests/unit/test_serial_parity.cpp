#include <doctest.h>

#include <cmath>

#include "adir/ops.hpp"
#include "adir/rng.hpp"
#include "adir/serial_ref.hpp"
#include "adir/synth.hpp"

using namespace adir;

// The OpenMP kernels must agree with the plain serial references on
// arbitrary inputs, independent of thread count.

namespace {

double max_diff(const std::vector<float>& a, const std::vector<float>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(static_cast<double>(a[i]) - b[i]));
    return m;
}

} // namespace

TEST_CASE("parallel kernels match serial references") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        Image img = make_clean_scene(64 + 7 * static_cast<int>(seed),
                                     48 + 5 * static_cast<int>(seed), seed);
        Plane lum = to_luminance(img);

        CHECK(max_diff(to_luminance(img).samples, serial::to_luminance(img).samples) == 0.0);

        Kernel k = box_kernel(5);
        CHECK(max_diff(convolve(lum, k).samples, serial::convolve(lum, k).samples) <= 1e-12);
        CHECK(max_diff(convolve_rgb(img, k).samples,
                       serial::convolve_rgb(img, k).samples) <= 1e-12);

        CHECK(max_diff(min_filter(lum, 3).samples, serial::min_filter(lum, 3).samples) ==
              0.0);

        for (ResizeMethod m : {ResizeMethod::Nearest, ResizeMethod::Bicubic}) {
            Image a = resize(img, 40, 52, m);
            Image b = serial::resize(img, 40, 52, m);
            CHECK(max_diff(a.samples, b.samples) <= 1e-12);
        }
    }
}

TEST_CASE("gaussian kernels are normalized and symmetric") {
    for (double sigma : {0.8, 1.5, 3.0}) {
        Kernel h = gaussian_kernel_1d(sigma, true);
        REQUIRE(h.height == 1);
        REQUIRE(h.width % 2 == 1);
        double sum = 0.0;
        for (float t : h.taps)
            sum += t;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        for (int i = 0; i < h.width / 2; ++i)
            CHECK(h.taps[i] == doctest::Approx(h.taps[h.width - 1 - i]));
    }
}
