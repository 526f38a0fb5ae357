#include "adir/features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "adir/error.hpp"
#include "adir/ops.hpp"

namespace adir {

const std::array<const char*, kFeatureCount> kFeatureNames = {
    "laplacian_variance", "gradient_p95",      "noise_sigma",       "residual_kurtosis",
    "dark_channel_mean",  "rms_contrast",      "streak_anisotropy", "streak_density",
    "mean_luminance",     "histogram_entropy", "shadow_fraction",   "highfreq_ratio",
    "width_norm",         "height_norm",       "saturation_mean",   "haze_gradient"};

const std::array<double, kFeatureCount> kFeatureScale = {
    1.0 / 0.002, 1.0 / 0.5, 1.0 / 0.2, 1.0 / 20.0, 1.0, 2.0,       1.0, 1.0 / 40.0,
    1.0,         1.0 / 6.0, 1.0,       1.0 / 0.8,  1.0, 1.0,       1.0, 2.0};
const std::array<double, kFeatureCount> kFeatureOffset = {
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5};

namespace {

// 0.6745 = standard normal MAD; 0.9428 = residual gain of the 3x3 box high-pass.
constexpr double kMadToSigma = 0.6745;
constexpr double kBoxResidualGain = 0.9428090415820634;

double percentile(std::vector<float> v, double p) {
    if (v.empty())
        return 0.0;
    size_t rank = static_cast<size_t>(p * (v.size() - 1));
    std::nth_element(v.begin(), v.begin() + rank, v.end());
    return v[rank];
}

Plane rgb_min(const Image& image) {
    Plane out(image.width, image.height);
    for (size_t i = 0; i < image.pixel_count(); ++i) {
        const float* px = &image.samples[i * 3];
        out.samples[i] = std::min(px[0], std::min(px[1], px[2]));
    }
    return out;
}

// box-down by 2, nearest back up; the difference carries the top octave
std::vector<float> down_up_residual(const Plane& lum) {
    const int w = lum.width, h = lum.height;
    const int w2 = std::max(1, w / 2), h2 = std::max(1, h / 2);
    std::vector<float> low(static_cast<size_t>(w2) * h2);
    for (int y = 0; y < h2; ++y)
        for (int x = 0; x < w2; ++x) {
            float acc = lum.at(2 * x, 2 * y);
            acc += lum.at(std::min(2 * x + 1, w - 1), 2 * y);
            acc += lum.at(2 * x, std::min(2 * y + 1, h - 1));
            acc += lum.at(std::min(2 * x + 1, w - 1), std::min(2 * y + 1, h - 1));
            low[static_cast<size_t>(y) * w2 + x] = acc * 0.25f;
        }
    std::vector<float> res(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        int sy = std::min(y / 2, h2 - 1);
        for (int x = 0; x < w; ++x) {
            int sx = std::min(x / 2, w2 - 1);
            res[static_cast<size_t>(y) * w + x] =
                lum.at(x, y) - low[static_cast<size_t>(sy) * w2 + sx];
        }
    }
    return res;
}

// connected components of the bright high-pass mask; counts components that
// look like rain streaks (small, clearly taller than wide)
int count_elongated_bright(const Plane& lum, const std::vector<float>& residual) {
    const int w = lum.width, h = lum.height;
    std::vector<uint8_t> mask(static_cast<size_t>(w) * h);
    for (size_t i = 0; i < mask.size(); ++i)
        mask[i] = residual[i] > 0.12f ? 1 : 0;

    std::vector<int> stack;
    int count = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t start = static_cast<size_t>(y) * w + x;
            if (!mask[start])
                continue;
            int min_x = x, max_x = x, min_y = y, max_y = y, size = 0;
            stack.push_back(static_cast<int>(start));
            mask[start] = 0;
            while (!stack.empty()) {
                int idx = stack.back();
                stack.pop_back();
                ++size;
                int cx = idx % w, cy = idx / w;
                min_x = std::min(min_x, cx);
                max_x = std::max(max_x, cx);
                min_y = std::min(min_y, cy);
                max_y = std::max(max_y, cy);
                const int nx[4] = {cx - 1, cx + 1, cx, cx};
                const int ny[4] = {cy, cy, cy - 1, cy + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h)
                        continue;
                    size_t nidx = static_cast<size_t>(ny[k]) * w + nx[k];
                    if (mask[nidx]) {
                        mask[nidx] = 0;
                        stack.push_back(static_cast<int>(nidx));
                    }
                }
            }
            int bw = max_x - min_x + 1, bh = max_y - min_y + 1;
            if (size >= 5 && size <= 256 && bh >= 2 * bw)
                ++count;
        }
    return count;
}

} // namespace

std::array<double, kFeatureCount> extract_features_raw(const Image& image) {
    if (image.width < 16 || image.height < 16)
        throw TooSmall("extract_features needs at least 16x16");

    const int w = image.width, h = image.height;
    const size_t n = static_cast<size_t>(w) * h;
    const Plane lum = to_luminance(image);

    std::array<double, kFeatureCount> f{};

    // luminance statistics: mean, RMS contrast, shadow mass, histogram entropy
    double sum = 0.0, sum_sq = 0.0;
    size_t shadow = 0;
    std::array<size_t, 64> hist{};
    for (size_t i = 0; i < n; ++i) {
        double v = lum.samples[i];
        sum += v;
        sum_sq += v * v;
        if (v < 0.1)
            ++shadow;
        int bin = std::min(63, static_cast<int>(v * 64.0));
        ++hist[bin];
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
    f[8] = mean;
    f[5] = std::sqrt(var);
    f[10] = static_cast<double>(shadow) / static_cast<double>(n);
    double entropy = 0.0;
    for (size_t c : hist)
        if (c > 0) {
            double p = static_cast<double>(c) / static_cast<double>(n);
            entropy -= p * std::log2(p);
        }
    f[9] = entropy;

    // Laplacian variance (sharpness)
    {
        Kernel lap;
        lap.width = lap.height = 3;
        lap.taps = {0, 1, 0, 1, -4, 1, 0, 1, 0};
        std::vector<float> r = convolve_raw(lum, lap);
        double s = 0.0, s2 = 0.0;
        for (float v : r) {
            s += v;
            s2 += static_cast<double>(v) * v;
        }
        double m = s / static_cast<double>(n);
        f[0] = std::max(0.0, s2 / static_cast<double>(n) - m * m);
    }

    // Sobel gradient p95
    {
        Kernel sx, sy;
        sx.width = sx.height = sy.width = sy.height = 3;
        sx.taps = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
        sy.taps = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
        std::vector<float> gx = convolve_raw(lum, sx);
        std::vector<float> gy = convolve_raw(lum, sy);
        std::vector<float> mag(n);
        for (size_t i = 0; i < n; ++i)
            mag[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
        f[1] = percentile(std::move(mag), 0.95);
    }

    // high-pass residual: noise sigma (MAD) and kurtosis; also rain components
    {
        // sigma is estimated per channel and pooled, so it reports sensor
        // noise rather than the luminance mix (which attenuates iid noise)
        std::vector<float> abs_resid;
        abs_resid.reserve(n * 3);
        for (int c = 0; c < 3; ++c) {
            Plane channel(w, h);
            for (size_t i = 0; i < n; ++i)
                channel.samples[i] = image.samples[i * 3 + c];
            std::vector<float> box_c = convolve_raw(channel, box_kernel(3));
            for (size_t i = 0; i < n; ++i)
                abs_resid.push_back(std::fabs(channel.samples[i] - box_c[i]));
        }
        double mad = percentile(std::move(abs_resid), 0.5);
        f[2] = mad / kMadToSigma / kBoxResidualGain;

        std::vector<float> box = convolve_raw(lum, box_kernel(3));
        std::vector<float> resid(n);
        for (size_t i = 0; i < n; ++i)
            resid[i] = lum.samples[i] - box[i];

        double m2 = 0.0, m4 = 0.0;
        for (float v : resid) {
            double d = v;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        m2 /= static_cast<double>(n);
        m4 /= static_cast<double>(n);
        f[3] = m2 > 1e-12 ? m4 / (m2 * m2) : 0.0;

        f[7] = static_cast<double>(count_elongated_bright(lum, resid)) /
               (static_cast<double>(n) / 1e4);
    }

    // dark channel and its vertical gradient
    {
        Plane dark = min_filter(rgb_min(image), 3);
        double total = 0.0;
        for (float v : dark.samples)
            total += v;
        f[4] = total / static_cast<double>(n);

        const int band = std::max(1, h / 4);
        double top = 0.0, bottom = 0.0;
        for (int y = 0; y < band; ++y)
            for (int x = 0; x < w; ++x) {
                top += dark.at(x, y);
                bottom += dark.at(x, h - 1 - y);
            }
        f[15] = (top - bottom) / (static_cast<double>(band) * w);
    }

    // gradient-orientation energy share (rain streaks are near-vertical, so
    // their energy shows up in horizontal differences)
    {
        double eh = 0.0, ev = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x + 1 < w; ++x) {
                double d = static_cast<double>(lum.at(x + 1, y)) - lum.at(x, y);
                eh += d * d;
            }
        for (int y = 0; y + 1 < h; ++y)
            for (int x = 0; x < w; ++x) {
                double d = static_cast<double>(lum.at(x, y + 1)) - lum.at(x, y);
                ev += d * d;
            }
        double s = eh + ev;
        f[6] = s > 0.0 ? eh / s : 0.5;
    }

    // resolution proxy
    {
        std::vector<float> res = down_up_residual(lum);
        double e = 0.0;
        for (float v : res)
            e += static_cast<double>(v) * v;
        double hf = std::sqrt(e / static_cast<double>(n));
        f[11] = hf / (f[5] + 1e-6);
    }

    f[12] = static_cast<double>(w) / 1024.0;
    f[13] = static_cast<double>(h) / 1024.0;

    // saturation
    {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const float* px = &image.samples[i * 3];
            float mx = std::max(px[0], std::max(px[1], px[2]));
            float mn = std::min(px[0], std::min(px[1], px[2]));
            if (mx > 1e-6f)
                s += (mx - mn) / mx;
        }
        f[14] = s / static_cast<double>(n);
    }

    return f;
}

FeatureVector extract_features(const Image& image) {
    std::array<double, kFeatureCount> raw = extract_features_raw(image);
    FeatureVector out;
    for (int i = 0; i < kFeatureCount; ++i) {
        double v = raw[i] * kFeatureScale[i] + kFeatureOffset[i];
        out.values[i] = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

} // namespace adir
