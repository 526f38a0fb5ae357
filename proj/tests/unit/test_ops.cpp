#include <doctest.h>

#include <cmath>

#include "adir/error.hpp"
#include "adir/ops.hpp"
#include "adir/rng.hpp"
#include "adir/synth.hpp"

using namespace adir;

namespace {

// Reference bicubic evaluator, written directly from the Catmull-Rom
// definition; kept independent of the library's resize path.
double catmull_rom(double t) {
    t = std::fabs(t);
    if (t <= 1.0)
        return ((1.5 * t - 2.5) * t) * t + 1.0;
    if (t < 2.0)
        return (((-0.5 * t + 2.5) * t) - 4.0) * t + 2.0;
    return 0.0;
}

double reference_bicubic_sample(const Image& src, double fx, double fy, int c) {
    int ix = static_cast<int>(std::floor(fx));
    int iy = static_cast<int>(std::floor(fy));
    double acc = 0.0;
    for (int j = -1; j <= 2; ++j)
        for (int i = -1; i <= 2; ++i) {
            int sx = std::clamp(ix + i, 0, src.width - 1);
            int sy = std::clamp(iy + j, 0, src.height - 1);
            acc += catmull_rom(fx - (ix + i)) * catmull_rom(fy - (iy + j)) *
                   src.at(sx, sy, c);
        }
    return std::clamp(acc, 0.0, 1.0);
}

Image reference_bicubic_resize(const Image& src, int w, int h) {
    Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                out.set(x, y, c,
                        static_cast<float>(reference_bicubic_sample(
                            src, (x + 0.5) * src.width / w - 0.5,
                            (y + 0.5) * src.height / h - 0.5, c)));
    return out;
}

Image horizontal_ramp(int w, int h) {
    Image img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.set(x, y, c, static_cast<float>(x) / (w - 1));
    return img;
}

} // namespace

TEST_CASE("resize to same dimensions is identity") {
    Image img = make_clean_scene(24, 17, 3);
    for (ResizeMethod m : {ResizeMethod::Nearest, ResizeMethod::Bicubic}) {
        Image out = resize(img, 24, 17, m);
        for (size_t i = 0; i < img.samples.size(); ++i)
            CHECK(out.samples[i] == img.samples[i]);
    }
}

TEST_CASE("resize of a constant image stays constant") {
    Image img(20, 20, 0.37f);
    for (ResizeMethod m : {ResizeMethod::Nearest, ResizeMethod::Bicubic}) {
        Image out = resize(img, 33, 9, m);
        CHECK(out.width == 33);
        CHECK(out.height == 9);
        for (float v : out.samples)
            CHECK(v == doctest::Approx(0.37f).epsilon(1e-6));
    }
}

TEST_CASE("bicubic down-up cycle of a linear ramp stays within 0.02") {
    Image ramp = horizontal_ramp(32, 32);
    Image down = resize(ramp, 16, 16, ResizeMethod::Bicubic);
    Image up = resize(down, 32, 32, ResizeMethod::Bicubic);

    // the implementation must agree with the independent reference evaluator
    Image ref_down = reference_bicubic_resize(ramp, 16, 16);
    Image ref_up = reference_bicubic_resize(ref_down, 32, 32);
    double impl_vs_ref = 0.0;
    for (size_t i = 0; i < up.samples.size(); ++i)
        impl_vs_ref = std::max(
            impl_vs_ref, std::abs(static_cast<double>(up.samples[i]) - ref_up.samples[i]));
    CHECK(impl_vs_ref < 1e-5);

    double max_err = 0.0;
    for (size_t i = 0; i < up.samples.size(); ++i)
        max_err = std::max(max_err,
                           std::abs(static_cast<double>(up.samples[i]) - ramp.samples[i]));
    CHECK(max_err < 0.02);
}

TEST_CASE("nearest integer upscale then decimation is sample-exact") {
    Image img = make_clean_scene(19, 13, 4);
    Image up = resize(img, 19 * 3, 13 * 3, ResizeMethod::Nearest);
    Image back = resize(up, 19, 13, ResizeMethod::Nearest);
    for (size_t i = 0; i < img.samples.size(); ++i)
        CHECK(back.samples[i] == img.samples[i]);
}

TEST_CASE("luminance weights") {
    Image white(4, 4, 1.0f);
    Plane lw = to_luminance(white);
    for (float v : lw.samples)
        CHECK(v == doctest::Approx(1.0f)); // weights sum to 1

    Image red(4, 4);
    for (size_t i = 0; i < red.pixel_count(); ++i)
        red.samples[i * 3] = 1.0f;
    Plane lr = to_luminance(red);
    for (float v : lr.samples)
        CHECK(v == doctest::Approx(0.299f));

    Image gray(4, 4, 0.42f);
    Plane lg = to_luminance(gray);
    for (float v : lg.samples)
        CHECK(v == doctest::Approx(0.42f).epsilon(1e-6));
}

TEST_CASE("convolve identity, box on constant, Laplacian on ramp") {
    Plane p(9, 7);
    Rng rng(12);
    for (auto& v : p.samples)
        v = static_cast<float>(rng.uniform());

    Kernel one;
    one.width = one.height = 1;
    one.taps = {1.0f};
    Plane id = convolve(p, one);
    for (size_t i = 0; i < p.samples.size(); ++i)
        CHECK(id.samples[i] == doctest::Approx(p.samples[i]));

    Plane flat(8, 8, 0.6f);
    Plane boxed = convolve(flat, box_kernel(3));
    for (float v : boxed.samples)
        CHECK(v == doctest::Approx(0.6f).epsilon(1e-6));

    // second difference of an affine function vanishes at interior pixels
    Plane ramp(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            ramp.set(x, y, 0.02f + 0.05f * x + 0.01f * y);
    Kernel lap;
    lap.width = lap.height = 3;
    lap.taps = {0, 1, 0, 1, -4, 1, 0, 1, 0};
    std::vector<float> r = convolve_raw(ramp, lap);
    for (int y = 1; y < 15; ++y)
        for (int x = 1; x < 15; ++x)
            CHECK(std::fabs(r[y * 16 + x]) < 1e-5);
}

TEST_CASE("even kernels are rejected") {
    Plane p(4, 4, 0.5f);
    Kernel even;
    even.width = 2;
    even.height = 3;
    even.taps.assign(6, 0.1f);
    CHECK_THROWS_AS(convolve(p, even), EvenKernel);
    Image img(4, 4, 0.5f);
    CHECK_THROWS_AS(convolve_rgb(img, even), EvenKernel);
}

TEST_CASE("outputs stay inside [0,1]") {
    Image img = make_clean_scene(21, 21, 6);
    Kernel sharpen;
    sharpen.width = sharpen.height = 3;
    sharpen.taps = {0, -1, 0, -1, 5, -1, 0, -1, 0}; // overshooting kernel
    Image out = convolve_rgb(img, sharpen);
    for (float v : out.samples) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
    Image shrunk = resize(img, 5, 31, ResizeMethod::Bicubic);
    for (float v : shrunk.samples) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("any kernel summing to one preserves constant planes exactly") {
    Rng rng(91);
    for (int trial = 0; trial < 25; ++trial) {
        Kernel k;
        k.width = 1 + 2 * static_cast<int>(rng.below(4));
        k.height = 1 + 2 * static_cast<int>(rng.below(4));
        k.taps.resize(static_cast<size_t>(k.width) * k.height);
        float sum = 0.0f;
        for (auto& t : k.taps) {
            t = static_cast<float>(rng.uniform(-0.5, 1.0));
            sum += t;
        }
        if (std::fabs(sum) < 0.1f) {
            k.taps[0] += 1.0f;
            sum += 1.0f;
        }
        for (auto& t : k.taps)
            t /= sum;

        const float value = static_cast<float>(rng.uniform(0.1, 0.9));
        Plane flat(11, 9, value);
        Plane out = convolve(flat, k);
        for (float v : out.samples)
            CHECK(v == doctest::Approx(value).epsilon(1e-5));
    }
}

TEST_CASE("min filter equals brute-force window minimum") {
    Plane p(13, 11);
    Rng rng(77);
    for (auto& v : p.samples)
        v = static_cast<float>(rng.uniform());
    Plane filtered = min_filter(p, 2);
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 13; ++x) {
            float m = 1.0f;
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx)
                    m = std::min(m, p.at(std::clamp(x + dx, 0, 12),
                                         std::clamp(y + dy, 0, 10)));
            CHECK(filtered.at(x, y) == m);
        }
}
