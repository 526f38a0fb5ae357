#include "adir/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "adir/blend.hpp"
#include "adir/codec.hpp"
#include "adir/error.hpp"
#include "adir/metrics.hpp"
#include "adir/ops.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace adir {

namespace {

using json = nlohmann::json;
using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point start) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - start).count();
}

bool is_image_file(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    return ext == ".ppm" || ext == ".png";
}

// '*' wildcard match on filenames
bool glob_match(const std::string& pattern, const std::string& name) {
    size_t pi = 0, ni = 0, star = std::string::npos, mark = 0;
    while (ni < name.size()) {
        if (pi < pattern.size() && (pattern[pi] == name[ni])) {
            ++pi;
            ++ni;
        } else if (pi < pattern.size() && pattern[pi] == '*') {
            star = pi++;
            mark = ni;
        } else if (star != std::string::npos) {
            pi = star + 1;
            ni = ++mark;
        } else {
            return false;
        }
    }
    while (pi < pattern.size() && pattern[pi] == '*')
        ++pi;
    return pi == pattern.size();
}

CorpusRecipe parse_synth_recipe(const std::string& body, uint64_t& seed, int& scenes) {
    CorpusRecipe recipe;
    scenes = 8;
    seed = 1;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("synth recipe expects key=value: " + item);
        std::string key = item.substr(0, eq), value = item.substr(eq + 1);
        if (key == "per_kind") {
            int n = std::stoi(value);
            recipe.per_kind_counts.fill(n);
        } else if (key == "clean") {
            recipe.clean_count = std::stoi(value);
        } else if (key == "scenes") {
            scenes = std::stoi(value);
        } else if (key == "seed") {
            seed = std::stoull(value);
        } else if (key == "size") {
            recipe.working_width = recipe.working_height = std::stoi(value);
        } else if (key == "sev") {
            size_t colon = value.find(':');
            if (colon == std::string::npos)
                throw ConfigError("sev expects lo:hi");
            recipe.severity_lo = std::stof(value.substr(0, colon));
            recipe.severity_hi = std::stof(value.substr(colon + 1));
        } else if (key == "combo") {
            // combo=KindA+KindB:count
            size_t colon = value.rfind(':');
            if (colon == std::string::npos)
                throw ConfigError("combo expects Kind+Kind:count");
            int count = std::stoi(value.substr(colon + 1));
            std::set<DegradationKind> kinds;
            std::stringstream ks(value.substr(0, colon));
            std::string kname;
            while (std::getline(ks, kname, '+')) {
                auto k = kind_from_name(kname);
                if (!k)
                    throw ConfigError("unknown kind in combo: " + kname);
                kinds.insert(*k);
            }
            recipe.combos.emplace_back(std::move(kinds), count);
        } else {
            throw ConfigError("unknown synth recipe key: " + key);
        }
    }
    return recipe;
}

std::vector<Frame> frames_from_paths(std::vector<std::filesystem::path> paths) {
    std::vector<Frame> out;
    out.reserve(paths.size());
    for (size_t i = 0; i < paths.size(); ++i) {
        Frame f;
        f.frame_id = i;
        f.source_id = paths[i].string();
        f.path = paths[i];
        try {
            f.image = load_image(paths[i]);
        } catch (const Error& e) {
            f.error = e.what(); // logged and skipped downstream
        }
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace

std::vector<Frame> frames(const std::string& source_spec) {
    if (source_spec.empty())
        throw NoMatches("empty source spec");

    if (source_spec.rfind("synth:", 0) == 0) {
        uint64_t seed = 1;
        int scenes = 8;
        CorpusRecipe recipe = parse_synth_recipe(source_spec.substr(6), seed, scenes);
        if (recipe.total() == 0)
            throw NoMatches("synth recipe requests zero frames");
        Corpus corpus = build_corpus_synthetic(scenes, recipe, seed);
        std::vector<Frame> out;
        out.reserve(corpus.samples.size());
        for (size_t i = 0; i < corpus.samples.size(); ++i) {
            Frame f;
            f.frame_id = i;
            f.source_id = "synth:" + std::to_string(i);
            f.image = std::move(corpus.samples[i].image);
            f.labels = corpus.samples[i].labels;
            out.push_back(std::move(f));
        }
        return out;
    }

    namespace fs = std::filesystem;
    std::vector<fs::path> paths;

    if (source_spec.find('*') != std::string::npos) {
        fs::path pattern(source_spec);
        fs::path dir = pattern.parent_path().empty() ? "." : pattern.parent_path();
        std::string name_pattern = pattern.filename().string();
        if (fs::is_directory(dir))
            for (const auto& entry : fs::directory_iterator(dir))
                if (entry.is_regular_file() &&
                    glob_match(name_pattern, entry.path().filename().string()))
                    paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
    } else if (fs::is_directory(source_spec)) {
        for (const auto& entry : fs::directory_iterator(source_spec))
            if (entry.is_regular_file() && is_image_file(entry.path()))
                paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
    } else {
        // explicit comma-separated file list, kept in the given order
        std::stringstream ss(source_spec);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty())
                paths.emplace_back(item);
        for (const auto& p : paths)
            if (!fs::exists(p))
                throw NoMatches("listed file missing: " + p.string());
    }

    if (paths.empty())
        throw NoMatches("no frames match source: " + source_spec);
    return frames_from_paths(std::move(paths));
}

std::string FrameRecord::to_json(const RouterConfig& cfg) const {
    json j;
    j["frame_id"] = frame_id;
    j["source"] = source_id;
    if (!error.empty()) {
        j["error"] = error;
        return j.dump();
    }
    json active_json = json::array();
    for (size_t i = 0; i < active.size(); ++i)
        active_json.push_back({{"kind", kind_name(active[i].first)},
                               {"p", active[i].second},
                               {"weight", active_weights[i]}});
    json bands = json::array();
    json probs_json = json::array();
    for (int i = 0; i < kKindCount; ++i) {
        bands.push_back(band_name(band(std::clamp(probs[i], 0.0, 1.0), cfg)));
        probs_json.push_back(probs[i]);
    }
    j["verdict"] = verdict_kind_name(verdict);
    j["active"] = active_json;
    j["probs"] = probs_json;
    j["bands"] = bands;
    j["tolerable"] = tolerable;
    j["timings_ms"] = {{"classify", classify_ms},
                       {"restore", restore_ms},
                       {"blend", blend_ms},
                       {"total", total_ms}};
    j["output"] = output_path;
    return j.dump();
}

namespace {

StageStats stats_of(std::vector<double> values) {
    StageStats s;
    s.count = values.size();
    if (values.empty())
        return s;
    std::sort(values.begin(), values.end());
    auto pick = [&](double q) {
        size_t rank = static_cast<size_t>(q * (values.size() - 1));
        return values[rank];
    };
    s.p50 = pick(0.50);
    s.p95 = pick(0.95);
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    return s;
}

struct FrameResult {
    FrameRecord record;
    std::optional<Image> restored; // absent for pass-through frames
};

FrameResult process_frame(const Frame& frame, const ResidualHead& model,
                          const RestorerRegistry& registry, const PipelineConfig& cfg,
                          const RouterConfig& router) {
    FrameResult result;
    FrameRecord& rec = result.record;
    rec.frame_id = frame.frame_id;
    rec.source_id = frame.source_id;
    if (!frame.error.empty()) {
        rec.error = frame.error;
        return result;
    }

    const auto t_total = clock_type::now();
    try {
        // classification runs on a bounded-size copy; restoration at native size
        const auto t_classify = clock_type::now();
        ProbabilityVector pv;
        if (frame.image.width > cfg.working_size || frame.image.height > cfg.working_size) {
            Image working = resize(frame.image, cfg.working_size, cfg.working_size,
                                   ResizeMethod::Bicubic);
            pv = predict(model, working, ActivationMode::Sigmoid);
        } else {
            pv = predict(model, frame.image, ActivationMode::Sigmoid);
        }
        Verdict verdict = decide(pv, router);
        rec.classify_ms = ms_since(t_classify);
        std::copy(pv.p.begin(), pv.p.end(), rec.probs.begin());
        rec.verdict = verdict.kind;
        rec.active = verdict.active;

        double max_p = *std::max_element(pv.p.begin(), pv.p.end());
        rec.tolerable = verdict.kind == VerdictKind::Undamaged &&
                        band(std::clamp(max_p, 0.0, 1.0), router) == SeverityBand::Tolerable;

        if (verdict.kind == VerdictKind::Single) {
            const auto t_restore = clock_type::now();
            result.restored = restore(verdict.active[0].first, frame.image, registry);
            rec.restore_ms = ms_since(t_restore);
            rec.active_weights = {1.0};
        } else if (verdict.kind == VerdictKind::Multiple) {
            const auto t_blend = clock_type::now();
            result.restored = aggregate(frame.image, pv, cfg.theta, registry,
                                        cfg.blend_mode);
            rec.blend_ms = ms_since(t_blend);
            ActiveSet set = weights(pv, cfg.theta);
            rec.active_weights = set.weights;
        }
        rec.total_ms = ms_since(t_total);
    } catch (const Error& e) {
        rec.error = e.what();
        rec.total_ms = ms_since(t_total);
    }
    return result;
}

std::string output_name(const Frame& frame) {
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "frame_%06llu",
                  static_cast<unsigned long long>(frame.frame_id));
    if (frame.path.empty())
        return std::string(prefix) + ".ppm";
    return std::string(prefix) + "_" + frame.path.stem().string() +
           frame.path.extension().string();
}

} // namespace

PipelineSummary run_pipeline(const PipelineConfig& config) {
    ResidualHead model;
    try {
        model = load_model(config.model_path);
    } catch (const Error& e) {
        throw ModelLoadFailure(std::string("cannot load model: ") + e.what());
    }

    std::vector<Frame> source_frames;
    try {
        source_frames = frames(config.source);
    } catch (const NoMatches& e) {
        throw EmptySource(e.what());
    }
    if (source_frames.empty())
        throw EmptySource("source produced no frames");

    RestorerRegistry registry(config.restorer_params);
    for (const auto& [kind, hook] : config.external_hooks)
        set_external(kind, hook.command_template, registry, hook.timeout_seconds);
    const RouterConfig router{config.theta, 0.5};

    std::filesystem::create_directories(config.out_dir);
    std::ofstream log(config.effective_log_path());
    if (!log)
        throw IoFailure("cannot write log " + config.effective_log_path().string());

    PipelineSummary summary;
    summary.frames_total = source_frames.size();
    std::vector<double> classify_ms, restore_ms, blend_ms, total_ms;

    // frames are processed in parallel chunks but emitted in source order
    const size_t chunk = static_cast<size_t>(std::max(1, config.jobs)) * 4;
    std::vector<FrameResult> results;
    for (size_t base = 0; base < source_frames.size(); base += chunk) {
        const size_t end = std::min(source_frames.size(), base + chunk);
        results.assign(end - base, {});
        #pragma omp parallel for schedule(dynamic) num_threads(config.jobs)
        for (long long i = 0; i < static_cast<long long>(end - base); ++i)
            results[static_cast<size_t>(i)] =
                process_frame(source_frames[base + i], model, registry, config, router);

        for (size_t i = 0; i < results.size(); ++i) {
            const Frame& frame = source_frames[base + i];
            FrameResult& r = results[i];
            FrameRecord& rec = r.record;
            if (rec.error.empty()) {
                auto out_path = config.out_dir / output_name(frame);
                try {
                    if (r.restored) {
                        save_image(*r.restored, out_path);
                    } else if (!frame.path.empty()) {
                        // undamaged frames pass through byte-identical
                        std::filesystem::copy_file(
                            frame.path, out_path,
                            std::filesystem::copy_options::overwrite_existing);
                    } else {
                        save_image(frame.image, out_path);
                    }
                    rec.output_path = out_path.string();
                } catch (const std::exception& e) {
                    rec.error = e.what();
                }
            }
            if (!rec.error.empty()) {
                ++summary.errors;
            } else {
                switch (rec.verdict) {
                case VerdictKind::Undamaged: ++summary.undamaged; break;
                case VerdictKind::Single: ++summary.single; break;
                case VerdictKind::Multiple: ++summary.multiple; break;
                }
                if (rec.tolerable)
                    ++summary.tolerable_flagged;
                classify_ms.push_back(rec.classify_ms);
                if (rec.verdict == VerdictKind::Single)
                    restore_ms.push_back(rec.restore_ms);
                if (rec.verdict == VerdictKind::Multiple)
                    blend_ms.push_back(rec.blend_ms);
                total_ms.push_back(rec.total_ms);
            }
            log << rec.to_json(router) << '\n';
        }
    }

    summary.stage_ms["classify"] = stats_of(std::move(classify_ms));
    summary.stage_ms["restore"] = stats_of(std::move(restore_ms));
    summary.stage_ms["blend"] = stats_of(std::move(blend_ms));
    summary.stage_ms["total"] = stats_of(std::move(total_ms));
    return summary;
}

BenchReport bench(const PipelineConfig& config, int repetitions) {
    if (repetitions < 1)
        throw ConfigError("repetitions must be >= 1");

    ResidualHead model;
    try {
        model = load_model(config.model_path);
    } catch (const Error& e) {
        throw ModelLoadFailure(std::string("cannot load model: ") + e.what());
    }
    std::vector<Frame> source_frames;
    try {
        source_frames = frames(config.source);
    } catch (const NoMatches& e) {
        throw EmptySource(e.what());
    }

    RestorerRegistry registry(config.restorer_params);
    const RouterConfig router{config.theta, 0.5};

    BenchReport report;
    report.frames = source_frames.size();
    report.repetitions = repetitions;

    std::vector<double> classify_ms, restore_ms, blend_ms, total_ms;
    size_t labeled = 0, hits = 0;
    double classify_seconds = 0.0, full_seconds = 0.0;

    for (int rep = 0; rep < repetitions; ++rep) {
        for (const Frame& frame : source_frames) {
            FrameResult r = process_frame(frame, model, registry, config, router);
            const FrameRecord& rec = r.record;
            if (!rec.error.empty())
                continue;
            classify_ms.push_back(rec.classify_ms);
            if (rec.verdict == VerdictKind::Single)
                restore_ms.push_back(rec.restore_ms);
            if (rec.verdict == VerdictKind::Multiple)
                blend_ms.push_back(rec.blend_ms);
            total_ms.push_back(rec.total_ms);
            classify_seconds += rec.classify_ms / 1000.0;
            full_seconds += rec.total_ms / 1000.0;

            if (rep == 0 && (!frame.labels.empty() || frame.source_id.rfind("synth:", 0) == 0)) {
                ++labeled;
                int best = 0;
                for (int o = 1; o < kKindCount; ++o)
                    if (rec.probs[o] > rec.probs[best])
                        best = o;
                if (frame.labels.empty()) {
                    if (rec.probs[best] < 0.5)
                        ++hits;
                } else if (frame.labels.count(static_cast<DegradationKind>(best))) {
                    ++hits;
                }
            }
        }
    }

    report.stage_ms["classify"] = stats_of(std::move(classify_ms));
    report.stage_ms["restore"] = stats_of(std::move(restore_ms));
    report.stage_ms["blend"] = stats_of(std::move(blend_ms));
    report.stage_ms["total"] = stats_of(std::move(total_ms));
    const double n_runs = static_cast<double>(source_frames.size()) * repetitions;
    if (classify_seconds > 0.0)
        report.classify_fps = n_runs / classify_seconds;
    if (full_seconds > 0.0)
        report.full_fps = n_runs / full_seconds;
    if (labeled > 0) {
        report.accuracy = static_cast<double>(hits) / static_cast<double>(labeled);
        report.efficiency = efficiency(*report.accuracy, full_seconds);
    }
    return report;
}

std::string BenchReport::to_text() const {
    std::ostringstream out;
    out << "stage      count      p50_ms      p95_ms     mean_ms\n";
    for (const char* stage : {"classify", "restore", "blend", "total"}) {
        const StageStats& s = stage_ms.at(stage);
        char line[128];
        std::snprintf(line, sizeof(line), "%-9s %6zu %11.3f %11.3f %11.3f\n", stage,
                      s.count, s.p50, s.p95, s.mean);
        out << line;
    }
    char fps[128];
    std::snprintf(fps, sizeof(fps), "classify_fps %.2f\nfull_fps %.2f\n", classify_fps,
                  full_fps);
    out << fps;
    if (accuracy) {
        char eff[128];
        std::snprintf(eff, sizeof(eff), "accuracy %.4f\nefficiency %.6f\n", *accuracy,
                      *efficiency);
        out << eff;
    }
    return out.str();
}

} // namespace adir
