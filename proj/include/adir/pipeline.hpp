#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adir/config.hpp"
#include "adir/route.hpp"
#include "adir/synth.hpp"

namespace adir {

struct Frame {
    uint64_t frame_id = 0;
    std::string source_id;          // path or synth:<n>
    std::filesystem::path path;     // empty for generated frames
    Image image;
    std::set<DegradationKind> labels; // ground truth when known (synth sources)
    std::string error; // decode failure; the pipeline logs and skips the frame
};

// Source spec: a directory (lexicographic *.ppm/*.png), a glob with '*', a
// comma-separated file list, or "synth:<recipe>" with a key=value recipe
// (per_kind=, clean=, combo=Kind+Kind:N, scenes=, seed=, size=, sev=lo:hi).
// Throws NoMatches when nothing matches.
std::vector<Frame> frames(const std::string& source_spec);

struct FrameRecord {
    uint64_t frame_id = 0;
    std::string source_id;
    VerdictKind verdict = VerdictKind::Undamaged;
    std::vector<std::pair<DegradationKind, double>> active;
    std::vector<double> active_weights;
    std::array<double, kKindCount> probs{};
    bool tolerable = false; // max p landed in the tolerable band
    double classify_ms = 0.0, restore_ms = 0.0, blend_ms = 0.0, total_ms = 0.0;
    std::string output_path;
    std::string error; // nonempty when the frame was skipped

    std::string to_json(const RouterConfig& cfg) const;
};

struct StageStats {
    double p50 = 0.0, p95 = 0.0, mean = 0.0;
    size_t count = 0;
};

struct PipelineSummary {
    size_t frames_total = 0;
    size_t undamaged = 0, single = 0, multiple = 0, errors = 0;
    size_t tolerable_flagged = 0;
    std::map<std::string, StageStats> stage_ms; // classify/restore/blend/total
};

PipelineSummary run_pipeline(const PipelineConfig& config);

struct BenchReport {
    std::map<std::string, StageStats> stage_ms;
    double classify_fps = 0.0;
    double full_fps = 0.0;
    std::optional<double> accuracy;   // only with labeled (synth) sources
    std::optional<double> efficiency; // accuracy / elapsed seconds
    size_t frames = 0;
    int repetitions = 1;

    std::string to_text() const;
};

BenchReport bench(const PipelineConfig& config, int repetitions);

} // namespace adir
