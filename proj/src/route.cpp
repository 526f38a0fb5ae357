#include "adir/route.hpp"

#include <algorithm>

#include <json.hpp>

#include "adir/error.hpp"

namespace adir {

Verdict decide(const ProbabilityVector& probs, const RouterConfig& cfg) {
    if (probs.mode != ActivationMode::Sigmoid)
        throw WrongMode("decide expects sigmoid-mode probabilities");

    Verdict v;
    for (int i = 0; i < kKindCount; ++i)
        if (probs.p[i] >= cfg.theta)
            v.active.emplace_back(static_cast<DegradationKind>(i), probs.p[i]);

    std::sort(v.active.begin(), v.active.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return kind_index(a.first) < kind_index(b.first);
    });

    if (v.active.empty())
        v.kind = VerdictKind::Undamaged;
    else if (v.active.size() == 1)
        v.kind = VerdictKind::Single;
    else
        v.kind = VerdictKind::Multiple;
    return v;
}

SeverityBand band(double p, const RouterConfig& cfg) {
    if (!(p >= 0.0 && p <= 1.0))
        throw OutOfRange("band expects p in [0,1]");
    if (p < cfg.band_low)
        return SeverityBand::None;
    if (p < cfg.theta)
        return SeverityBand::Tolerable;
    return SeverityBand::Significant;
}

const std::string& band_name(SeverityBand b) {
    static const std::string names[] = {"none", "tolerable", "significant"};
    return names[static_cast<int>(b)];
}

const std::string& verdict_kind_name(VerdictKind k) {
    static const std::string names[] = {"undamaged", "single", "multiple"};
    return names[static_cast<int>(k)];
}

std::string verdict_to_json(const Verdict& verdict, const ProbabilityVector& probs,
                            const RouterConfig& cfg) {
    nlohmann::json active = nlohmann::json::array();
    for (const auto& [kind, p] : verdict.active)
        active.push_back({{"kind", kind_name(kind)}, {"p", p}});
    nlohmann::json bands = nlohmann::json::array();
    for (int i = 0; i < kKindCount; ++i)
        bands.push_back(band_name(band(std::clamp(probs.p[i], 0.0, 1.0), cfg)));
    nlohmann::json j{{"verdict", verdict_kind_name(verdict.kind)},
                     {"active", active},
                     {"bands", bands}};
    return j.dump();
}

} // namespace adir
