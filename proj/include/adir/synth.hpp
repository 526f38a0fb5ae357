#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adir/image.hpp"
#include "adir/kinds.hpp"

namespace adir {

struct LabeledSample {
    Image image;
    std::set<DegradationKind> labels; // empty = clean
    std::map<DegradationKind, float> severities;
    std::string clean_ref;  // path of the undegraded source, may be empty
    std::string image_path; // manifest-relative path once materialized
    uint64_t seed = 0;

    // canonical stratum key: kind names joined by '+' in index order, "clean" if none
    std::string stratum_key() const;
};

struct Corpus {
    std::vector<LabeledSample> samples;
    std::filesystem::path manifest_path;
    // generated clean scenes keyed by their clean_ref, so write_corpus can
    // materialize them next to the samples
    std::vector<std::pair<std::string, Image>> clean_sources;
};

// What build_corpus should produce. Single-label samples are the common
// case; multi-label combos are opt-in through `combos`.
struct CorpusRecipe {
    std::array<int, kKindCount> per_kind_counts = {0, 0, 0, 0, 0, 0, 0};
    std::vector<std::pair<std::set<DegradationKind>, int>> combos;
    int clean_count = 0;
    int working_width = 256;  // clean sources are resized here before degradation
    int working_height = 256;
    float severity_lo = 0.5f;
    float severity_hi = 0.9f;
    bool sr_upsample_back = false; // nearest-upsample SuperResolution samples back up

    int total() const;
};

// Deterministic structured test scene: gradient background, solid rectangles,
// low-amplitude texture noise. Keeps the corpus hermetic (no external photos).
Image make_clean_scene(int width, int height, uint64_t seed);

// Applies one synthetic degradation. Deterministic in (clean, kind, severity,
// seed); severity 0 returns the input unchanged. Dimensions preserved except
// SuperResolution, which floor-halves both.
Image apply_degradation(const Image& clean, DegradationKind kind, float severity,
                        uint64_t seed);

// Degrades every requested sample from the clean images found in clean_dir.
// Throws EmptyCleanSet if the directory holds no decodable image.
Corpus build_corpus(const std::filesystem::path& clean_dir, const CorpusRecipe& recipe,
                    uint64_t seed);

// Same, but drawing clean scenes from make_clean_scene instead of files.
Corpus build_corpus_synthetic(int clean_scene_count, const CorpusRecipe& recipe,
                              uint64_t seed);

// Per-stratum sampling without replacement; test counts follow the exact
// proportion within one sample per stratum and hit round(total x fraction)
// overall. Throws StratumTooSmall if any stratum has fewer than 2 samples.
std::pair<Corpus, Corpus> stratified_split(const Corpus& corpus, double test_fraction,
                                           uint64_t seed);

// Writes sample images (sample_NNNNNN.ppm) and a JSON-lines manifest into
// out_dir; image paths in the manifest are relative to it.
// Throws UnwritableManifest on failure. Returns the manifest path.
std::filesystem::path write_corpus(Corpus& corpus, const std::filesystem::path& out_dir);

// Writes only the manifest for an already materialized corpus.
void write_manifest(const Corpus& corpus, const std::filesystem::path& manifest_path);

// Loads a manifest and the images it references.
Corpus load_corpus(const std::filesystem::path& manifest_path);

} // namespace adir
