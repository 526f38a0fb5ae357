#pragma once

#include <array>
#include <string>

#include "adir/image.hpp"

namespace adir {

inline constexpr int kFeatureCount = 16;

// Fixed slot order. Raw values are the quantities below; the normalized
// vector applies the per-slot affine maps from kFeatureScale/kFeatureOffset
// (frozen in code, not fit to data) and clamps to [0,1].
//
//  [0] variance of Laplacian of luminance (sharpness)
//  [1] 95th percentile of Sobel gradient magnitude
//  [2] noise sigma estimate: MAD of the 3x3 box high-pass residual / 0.6745,
//      corrected for the filter's gain
//  [3] kurtosis of the high-pass residual
//  [4] dark-channel mean (RGB min, 7x7 min filter)
//  [5] global RMS contrast (std of luminance)
//  [6] horizontal-vs-vertical gradient energy share (rain streak score)
//  [7] density of bright vertically-elongated components per 10^4 px (rain)
//  [8] mean luminance
//  [9] luminance histogram entropy, bits over 64 bins
// [10] fraction of pixels darker than 0.1 (shadow mass)
// [11] high-frequency energy ratio after a down-up cycle (resolution proxy)
// [12] width / 1024
// [13] height / 1024
// [14] mean HSV saturation
// [15] top-minus-bottom dark-channel difference (outdoor haze gradient)
extern const std::array<const char*, kFeatureCount> kFeatureNames;

struct FeatureVector {
    std::array<double, kFeatureCount> values{}; // normalized, in [0,1]
};

// Raw slot values before normalization. Throws TooSmall below 16x16.
std::array<double, kFeatureCount> extract_features_raw(const Image& image);

FeatureVector extract_features(const Image& image);

// The affine maps: normalized = clamp01(raw * scale + offset).
extern const std::array<double, kFeatureCount> kFeatureScale;
extern const std::array<double, kFeatureCount> kFeatureOffset;

} // namespace adir
