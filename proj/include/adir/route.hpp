#pragma once

#include <string>
#include <vector>

#include "adir/classify.hpp"
#include "adir/kinds.hpp"

namespace adir {

struct RouterConfig {
    double theta = 0.85;   // degradation threshold
    double band_low = 0.5; // lower edge of the tolerable band
};

enum class VerdictKind { Undamaged, Single, Multiple };

struct Verdict {
    VerdictKind kind = VerdictKind::Undamaged;
    // active degradations, probability >= theta, sorted by descending
    // probability with ties broken by kind index; empty for Undamaged
    std::vector<std::pair<DegradationKind, double>> active;
};

enum class SeverityBand { None, Tolerable, Significant };

// Verdict trichotomy: Undamaged when max p < theta, Single when exactly one
// class reaches theta, Multiple otherwise. Boundary p == theta counts as
// degraded. Throws WrongMode on softmax-mode input.
Verdict decide(const ProbabilityVector& probs, const RouterConfig& cfg);

// [0, band_low) -> None, [band_low, theta) -> Tolerable, [theta, 1] ->
// Significant. Throws OutOfRange outside [0,1].
SeverityBand band(double p, const RouterConfig& cfg = {});

const std::string& band_name(SeverityBand b);
const std::string& verdict_kind_name(VerdictKind k);

// {"verdict": ..., "active": [{"kind":..., "p":...}], "bands": [...]}
std::string verdict_to_json(const Verdict& verdict, const ProbabilityVector& probs,
                            const RouterConfig& cfg = {});

} // namespace adir
