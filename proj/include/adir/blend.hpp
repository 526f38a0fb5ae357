#pragma once

#include <vector>

#include "adir/classify.hpp"
#include "adir/restore.hpp"

namespace adir {

enum class BlendMode { Parallel, Sequential };

struct ActiveSet {
    // (kind, probability) with p >= theta, descending p, ties by kind index
    std::vector<std::pair<DegradationKind, double>> entries;
    // w_i = p_i / sum of active p_j; sums to 1
    std::vector<double> weights;
};

// Throws NoActiveDegradation when nothing reaches theta.
ActiveSet weights(const ProbabilityVector& probs, double theta);

// Probability-weighted restoration: every active restorer runs on the
// original frame and the outputs are combined per pixel with the normalized
// weights. SuperResolution cannot join a per-pixel sum (its output is 2x), so
// it is composed after the blend instead. A single active kind short-circuits
// to that restorer's output with no arithmetic applied.
//
// Sequential mode chains the active restorers in descending-probability order.
Image aggregate(const Image& image, const ProbabilityVector& probs, double theta,
                const RestorerRegistry& registry, BlendMode mode = BlendMode::Parallel);

} // namespace adir
