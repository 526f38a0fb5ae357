#include "adir/blend.hpp"

#include <algorithm>

#include "adir/error.hpp"

namespace adir {

ActiveSet weights(const ProbabilityVector& probs, double theta) {
    ActiveSet set;
    for (int i = 0; i < kKindCount; ++i)
        if (probs.p[i] >= theta)
            set.entries.emplace_back(static_cast<DegradationKind>(i), probs.p[i]);
    if (set.entries.empty())
        throw NoActiveDegradation("no probability reaches theta");

    std::sort(set.entries.begin(), set.entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return kind_index(a.first) < kind_index(b.first);
    });

    double mu_inv = 0.0;
    for (const auto& [kind, p] : set.entries)
        mu_inv += p;
    set.weights.reserve(set.entries.size());
    for (const auto& [kind, p] : set.entries)
        set.weights.push_back(p / mu_inv);
    return set;
}

Image aggregate(const Image& image, const ProbabilityVector& probs, double theta,
                const RestorerRegistry& registry, BlendMode mode) {
    ActiveSet set = weights(probs, theta);

    if (mode == BlendMode::Sequential) {
        Image out = image;
        for (const auto& [kind, p] : set.entries)
            out = restore(kind, out, registry);
        return out;
    }

    if (set.entries.size() == 1)
        return restore(set.entries[0].first, image, registry);

    // SuperResolution changes dimensions, so it composes after the blend
    std::vector<std::pair<DegradationKind, double>> same_size;
    bool sr_active = false;
    for (const auto& entry : set.entries) {
        if (entry.first == DegradationKind::SuperResolution)
            sr_active = true;
        else
            same_size.push_back(entry);
    }

    Image blended;
    if (same_size.size() == 1) {
        blended = restore(same_size[0].first, image, registry);
    } else {
        double norm = 0.0;
        for (const auto& [kind, p] : same_size)
            norm += p;

        std::vector<Image> branches(same_size.size());
        // branch restorations are independent; run them concurrently
        #pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(same_size.size()); ++i)
            branches[static_cast<size_t>(i)] =
                restore(same_size[static_cast<size_t>(i)].first, image, registry);

        for (const auto& b : branches)
            if (!b.same_dims(branches[0]))
                throw DimensionMismatch("restorer outputs disagree in size");

        blended = Image(branches[0].width, branches[0].height);
        std::vector<double> acc(blended.samples.size());
        for (size_t b = 0; b < branches.size(); ++b) {
            const double w = same_size[b].second / norm;
            const auto& src = branches[b].samples;
            for (size_t i = 0; i < src.size(); ++i)
                acc[i] += w * src[i];
        }
        for (size_t i = 0; i < acc.size(); ++i)
            blended.samples[i] = clamp01(static_cast<float>(acc[i]));
    }

    if (sr_active)
        return restore(DegradationKind::SuperResolution, blended, registry);
    return blended;
}

} // namespace adir
