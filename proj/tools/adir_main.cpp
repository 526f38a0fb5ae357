// adir — adaptive degradation-aware image restoration pipeline.
//
// Subcommands: degrade, split, train, sweep, classify, restore, run, eval, bench.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "adir/blend.hpp"
#include "adir/codec.hpp"
#include "adir/config.hpp"
#include "adir/error.hpp"
#include "adir/metrics.hpp"
#include "adir/ops.hpp"
#include "adir/pipeline.hpp"

using namespace adir;

namespace {

// Generic dotted-key overrides: any leftover --key value / --key=value pair is
// merged into the config, so every config key doubles as a CLI flag.
void merge_extras(Config& cfg, const std::vector<std::string>& extras) {
    for (size_t i = 0; i < extras.size(); ++i) {
        const std::string& arg = extras[i];
        if (arg.rfind("--", 0) != 0)
            throw ConfigError("unexpected argument: " + arg);
        std::string body = arg.substr(2);
        size_t eq = body.find('=');
        if (eq != std::string::npos) {
            cfg.set(body.substr(0, eq), body.substr(eq + 1));
        } else {
            if (i + 1 >= extras.size())
                throw ConfigError("flag --" + body + " needs a value");
            cfg.set(body, extras[++i]);
        }
    }
}

Config load_base_config(const std::string& config_path) {
    return config_path.empty() ? Config{} : Config::from_file(config_path);
}

CorpusRecipe recipe_from_cli(int per_kind, int clean, const std::vector<std::string>& combos,
                             const std::vector<std::string>& kind_counts, int size,
                             double sev_lo, double sev_hi, bool sr_up) {
    CorpusRecipe recipe;
    recipe.per_kind_counts.fill(per_kind);
    for (const std::string& spec : kind_counts) {
        size_t colon = spec.rfind(':');
        if (colon == std::string::npos)
            throw ConfigError("--count expects Kind:count");
        auto k = kind_from_name(spec.substr(0, colon));
        if (!k)
            throw ConfigError("unknown kind: " + spec.substr(0, colon));
        recipe.per_kind_counts[kind_index(*k)] = std::stoi(spec.substr(colon + 1));
    }
    recipe.clean_count = clean;
    recipe.working_width = recipe.working_height = size;
    recipe.severity_lo = static_cast<float>(sev_lo);
    recipe.severity_hi = static_cast<float>(sev_hi);
    recipe.sr_upsample_back = sr_up;
    for (const std::string& spec : combos) {
        size_t colon = spec.rfind(':');
        if (colon == std::string::npos)
            throw ConfigError("--combo expects Kind+Kind:count");
        int count = std::stoi(spec.substr(colon + 1));
        std::set<DegradationKind> kinds;
        std::stringstream ss(spec.substr(0, colon));
        std::string name;
        while (std::getline(ss, name, '+')) {
            auto k = kind_from_name(name);
            if (!k)
                throw ConfigError("unknown kind: " + name);
            kinds.insert(*k);
        }
        recipe.combos.emplace_back(std::move(kinds), count);
    }
    return recipe;
}

OptimizerKind optimizer_from(const std::string& name) {
    if (name == "adam")
        return OptimizerKind::Adam;
    if (name == "sgd" || name == "sgd_momentum")
        return OptimizerKind::SgdMomentum;
    throw ConfigError("optimizer must be adam or sgd");
}

ActivationMode mode_from(const std::string& name) {
    if (name == "sigmoid")
        return ActivationMode::Sigmoid;
    if (name == "softmax")
        return ActivationMode::Softmax;
    throw ConfigError("mode must be sigmoid or softmax");
}

std::vector<double> parse_doubles(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(std::stod(item));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive degradation-aware image restoration pipeline"};
    app.require_subcommand(1);

    // ---- degrade -----------------------------------------------------------
    auto* degrade = app.add_subcommand("degrade", "build a labeled degraded corpus");
    std::string dg_clean, dg_out = "corpus";
    int dg_per_kind = 10, dg_clean_count = 0, dg_size = 256, dg_scenes = 8;
    double dg_sev_lo = 0.5, dg_sev_hi = 0.9;
    uint64_t dg_seed = 1;
    bool dg_sr_up = false;
    std::vector<std::string> dg_combos, dg_counts;
    degrade->add_option("--clean", dg_clean, "directory of clean images (omit to use generated scenes)");
    degrade->add_option("--out", dg_out, "output directory")->capture_default_str();
    degrade->add_option("--per-kind", dg_per_kind, "samples per degradation kind")->capture_default_str();
    degrade->add_option("--count", dg_counts, "per-kind override, Kind:count (repeatable)");
    degrade->add_option("--clean-count", dg_clean_count, "undegraded samples")->capture_default_str();
    degrade->add_option("--combo", dg_combos, "multi-label combo, Kind+Kind:count (repeatable)");
    degrade->add_option("--size", dg_size, "working size")->capture_default_str();
    degrade->add_option("--sev-min", dg_sev_lo, "severity lower bound")->capture_default_str();
    degrade->add_option("--sev-max", dg_sev_hi, "severity upper bound")->capture_default_str();
    degrade->add_option("--scenes", dg_scenes, "generated clean scenes when --clean is omitted")->capture_default_str();
    degrade->add_option("--seed", dg_seed, "corpus seed")->capture_default_str();
    degrade->add_flag("--sr-upsample-back", dg_sr_up, "nearest-upsample SuperResolution samples back");

    // ---- split ---------------------------------------------------------------
    auto* split = app.add_subcommand("split", "stratified train/test split of a manifest");
    std::string sp_manifest, sp_train = "train.jsonl", sp_test = "test.jsonl";
    double sp_fraction = 0.2;
    uint64_t sp_seed = 1;
    split->add_option("--manifest", sp_manifest, "corpus manifest")->required();
    split->add_option("--test-fraction", sp_fraction, "test fraction in (0,1)")->capture_default_str();
    split->add_option("--out-train", sp_train, "train manifest name (written next to input)")->capture_default_str();
    split->add_option("--out-test", sp_test, "test manifest name")->capture_default_str();
    split->add_option("--seed", sp_seed, "split seed")->capture_default_str();

    // ---- train ---------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train the degradation classifier");
    std::string tr_manifest, tr_model = "model.adrm", tr_history, tr_opt = "adam",
                tr_mode = "sigmoid";
    int tr_epochs = 35, tr_batch = 64, tr_hidden = 32;
    double tr_lr = 0.001, tr_beta = 0.9;
    uint64_t tr_seed = 1;
    train_cmd->add_option("--manifest", tr_manifest, "training corpus manifest")->required();
    train_cmd->add_option("--model", tr_model, "output model path")->capture_default_str();
    train_cmd->add_option("--history", tr_history, "per-epoch CSV output");
    train_cmd->add_option("--epochs", tr_epochs)->capture_default_str();
    train_cmd->add_option("--batch", tr_batch)->capture_default_str();
    train_cmd->add_option("--optimizer", tr_opt, "adam or sgd")->capture_default_str();
    train_cmd->add_option("--lr", tr_lr, "learning rate")->capture_default_str();
    train_cmd->add_option("--momentum", tr_beta, "sgd momentum beta")->capture_default_str();
    train_cmd->add_option("--hidden", tr_hidden, "hidden width")->capture_default_str();
    train_cmd->add_option("--mode", tr_mode, "sigmoid or softmax")->capture_default_str();
    train_cmd->add_option("--seed", tr_seed)->capture_default_str();

    // ---- sweep ---------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "learning-rate or momentum sweep");
    std::string sw_manifest, sw_values = "0.001,0.003,0.01", sw_opt = "adam",
                sw_mode = "sigmoid";
    int sw_epochs = 35, sw_batch = 64, sw_hidden = 32;
    uint64_t sw_seed = 1;
    sweep->add_option("--manifest", sw_manifest, "training corpus manifest")->required();
    sweep->add_option("--values", sw_values, "comma-separated values to sweep")->capture_default_str();
    sweep->add_option("--optimizer", sw_opt, "adam sweeps lr, sgd sweeps momentum")->capture_default_str();
    sweep->add_option("--epochs", sw_epochs)->capture_default_str();
    sweep->add_option("--batch", sw_batch)->capture_default_str();
    sweep->add_option("--hidden", sw_hidden)->capture_default_str();
    sweep->add_option("--mode", sw_mode)->capture_default_str();
    sweep->add_option("--seed", sw_seed)->capture_default_str();

    // ---- classify --------------------------------------------------------------
    auto* classify = app.add_subcommand("classify", "diagnose one image");
    std::string cl_model, cl_image;
    double cl_theta = 0.85;
    bool cl_dump_features = false, cl_json = false;
    classify->add_option("--model", cl_model, "model path")->required();
    classify->add_option("--image", cl_image, "image path")->required();
    classify->add_option("--theta", cl_theta, "degradation threshold")->capture_default_str();
    classify->add_flag("--dump-features", cl_dump_features, "emit the 16 feature values as CSV");
    classify->add_flag("--json", cl_json, "emit the verdict as JSON");

    // ---- restore ---------------------------------------------------------------
    auto* restore_cmd = app.add_subcommand("restore", "apply one restoration operator");
    std::string rs_kind, rs_in, rs_out;
    restore_cmd->add_option("--kind", rs_kind, "degradation kind")->required();
    restore_cmd->add_option("--in", rs_in, "input image")->required();
    restore_cmd->add_option("--out", rs_out, "output image")->required();

    // ---- run -------------------------------------------------------------------
    auto* run = app.add_subcommand("run", "run the full pipeline over a frame source");
    run->allow_extras(); // dotted config overrides
    std::string rn_config, rn_model, rn_source, rn_out, rn_log;
    double rn_theta = -1.0;
    int rn_jobs = 0;
    int64_t rn_seed = -1;
    run->add_option("--config", rn_config, "config file (key = value lines)");
    run->add_option("--model", rn_model, "model path");
    run->add_option("--source", rn_source, "frame source spec");
    run->add_option("--out", rn_out, "output directory");
    run->add_option("--log", rn_log, "JSON-lines log path");
    run->add_option("--theta", rn_theta, "degradation threshold");
    run->add_option("--jobs", rn_jobs, "frame-level parallelism");
    run->add_option("--seed", rn_seed, "pipeline seed");

    // ---- eval ------------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "evaluate classifier + restorers on a labeled manifest");
    std::string ev_model, ev_manifest, ev_out;
    double ev_theta = 0.85;
    eval->add_option("--model", ev_model)->required();
    eval->add_option("--manifest", ev_manifest)->required();
    eval->add_option("--out", ev_out, "CSV output path (default stdout)");
    eval->add_option("--theta", ev_theta)->capture_default_str();

    // ---- bench -----------------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "latency benchmark");
    bench_cmd->allow_extras();
    std::string bn_config, bn_model, bn_source;
    int bn_reps = 1, bn_jobs = 0;
    bench_cmd->add_option("--config", bn_config, "config file");
    bench_cmd->add_option("--model", bn_model, "model path");
    bench_cmd->add_option("--source", bn_source, "frame source spec");
    bench_cmd->add_option("--repetitions", bn_reps)->capture_default_str();
    bench_cmd->add_option("--jobs", bn_jobs, "frame-level parallelism");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*degrade) {
            CorpusRecipe recipe = recipe_from_cli(dg_per_kind, dg_clean_count, dg_combos,
                                                  dg_counts, dg_size, dg_sev_lo, dg_sev_hi,
                                                  dg_sr_up);
            Corpus corpus = dg_clean.empty()
                                ? build_corpus_synthetic(dg_scenes, recipe, dg_seed)
                                : build_corpus(dg_clean, recipe, dg_seed);
            auto manifest = write_corpus(corpus, dg_out);
            std::printf("wrote %zu samples, manifest %s\n", corpus.samples.size(),
                        manifest.string().c_str());
        } else if (*split) {
            Corpus corpus = load_corpus(sp_manifest);
            auto [train_part, test_part] = stratified_split(corpus, sp_fraction, sp_seed);
            auto dir = std::filesystem::path(sp_manifest).parent_path();
            write_manifest(train_part, dir / sp_train);
            write_manifest(test_part, dir / sp_test);
            std::printf("train %zu test %zu\n", train_part.samples.size(),
                        test_part.samples.size());
        } else if (*train_cmd) {
            Corpus corpus = load_corpus(tr_manifest);
            Hyperparams hyper;
            hyper.epochs = tr_epochs;
            hyper.batch_size = tr_batch;
            hyper.optimizer = optimizer_from(tr_opt);
            hyper.alpha = tr_lr;
            hyper.beta = tr_beta;
            hyper.hidden = tr_hidden;
            hyper.seed = tr_seed;
            auto [model, history] = train(corpus, hyper, mode_from(tr_mode));
            save_model(model, tr_model);
            if (!tr_history.empty()) {
                std::ofstream h(tr_history);
                h << history.to_csv();
            }
            const auto& last = history.epochs.back();
            std::printf("trained %d epochs, val_loss %.4f val_accuracy %.4f -> %s\n",
                        last.epoch, last.val_loss, last.val_accuracy, tr_model.c_str());
        } else if (*sweep) {
            Corpus corpus = load_corpus(sw_manifest);
            Hyperparams hyper;
            hyper.epochs = sw_epochs;
            hyper.batch_size = sw_batch;
            hyper.hidden = sw_hidden;
            hyper.seed = sw_seed;
            hyper.optimizer = optimizer_from(sw_opt);
            std::vector<double> values = parse_doubles(sw_values);
            SweepReport report = hyper.optimizer == OptimizerKind::Adam
                                     ? lr_sweep(corpus, values, hyper, mode_from(sw_mode))
                                     : momentum_sweep(corpus, values, hyper, mode_from(sw_mode));
            std::printf("%s,val_accuracy,val_loss\n",
                        hyper.optimizer == OptimizerKind::Adam ? "lr" : "momentum");
            for (const auto& row : report.rows)
                std::printf("%g,%.4f,%.4f\n", row.value, row.val_accuracy, row.val_loss);
            std::printf("best %g\n", report.best);
        } else if (*classify) {
            ResidualHead model = load_model(cl_model);
            Image image = load_image(cl_image);
            if (cl_dump_features) {
                FeatureVector fv = extract_features(image);
                for (int i = 0; i < kFeatureCount; ++i)
                    std::printf("%s%s", kFeatureNames[i], i + 1 < kFeatureCount ? "," : "\n");
                for (int i = 0; i < kFeatureCount; ++i)
                    std::printf("%.6f%s", fv.values[i], i + 1 < kFeatureCount ? "," : "\n");
            }
            ProbabilityVector pv = predict(model, image, ActivationMode::Sigmoid);
            RouterConfig router{cl_theta, 0.5};
            Verdict verdict = decide(pv, router);
            if (cl_json) {
                std::printf("%s\n", verdict_to_json(verdict, pv, router).c_str());
            } else if (!cl_dump_features) {
                std::printf("verdict: %s\n", verdict_kind_name(verdict.kind).c_str());
                for (const auto& [kind, p] : verdict.active)
                    std::printf("  %s p=%.4f\n", kind_name(kind).c_str(), p);
                for (int i = 0; i < kKindCount; ++i)
                    std::printf("p[%s] = %.4f\n",
                                kind_name(static_cast<DegradationKind>(i)).c_str(), pv.p[i]);
            }
        } else if (*restore_cmd) {
            auto kind = kind_from_name(rs_kind);
            if (!kind)
                throw ConfigError("unknown kind: " + rs_kind);
            RestorerRegistry registry;
            Image out = restore(*kind, load_image(rs_in), registry);
            save_image(out, rs_out);
            std::printf("restored %s -> %s (%dx%d)\n", rs_in.c_str(), rs_out.c_str(),
                        out.width, out.height);
        } else if (*run) {
            Config cfg = load_base_config(rn_config);
            merge_extras(cfg, run->remaining());
            if (!rn_model.empty())
                cfg.set("model", rn_model);
            if (!rn_source.empty())
                cfg.set("source", rn_source);
            if (!rn_out.empty())
                cfg.set("out", rn_out);
            if (!rn_log.empty())
                cfg.set("log", rn_log);
            if (rn_theta >= 0.0)
                cfg.set("theta", std::to_string(rn_theta));
            if (rn_jobs > 0)
                cfg.set("jobs", std::to_string(rn_jobs));
            if (rn_seed >= 0)
                cfg.set("seed", std::to_string(rn_seed));
            PipelineConfig pc = pipeline_config_from(cfg);
            PipelineSummary summary = run_pipeline(pc);
            std::printf("frames %zu: undamaged %zu single %zu multiple %zu errors %zu "
                        "(tolerable flagged %zu)\n",
                        summary.frames_total, summary.undamaged, summary.single,
                        summary.multiple, summary.errors, summary.tolerable_flagged);
            for (const char* stage : {"classify", "restore", "blend", "total"}) {
                const StageStats& s = summary.stage_ms.at(stage);
                std::printf("%-9s count %zu p50 %.3f ms p95 %.3f ms mean %.3f ms\n", stage,
                            s.count, s.p50, s.p95, s.mean);
            }
        } else if (*eval) {
            ResidualHead model = load_model(ev_model);
            Corpus corpus = load_corpus(ev_manifest);
            RestorerRegistry registry;

            std::vector<int> truth, predicted;
            for (const auto& sample : corpus.samples) {
                if (sample.labels.size() != 1)
                    continue; // argmax confusion is single-label
                ProbabilityVector pv = predict(model, sample.image, ActivationMode::Sigmoid);
                int best = 0;
                for (int o = 1; o < kKindCount; ++o)
                    if (pv.p[o] > pv.p[best])
                        best = o;
                truth.push_back(kind_index(*sample.labels.begin()));
                predicted.push_back(best);
            }
            if (truth.empty())
                throw EmptyCorpus("manifest holds no single-label samples");
            ConfusionMatrix cm = confusion(truth, predicted, kKindCount);

            // restoration quality per kind, when the clean source is loadable
            std::array<double, kKindCount> psnr_sum{}, ssim_sum{};
            std::array<int, kKindCount> quality_count{};
            for (const auto& sample : corpus.samples) {
                if (sample.labels.size() != 1 || sample.clean_ref.empty() ||
                    sample.clean_ref.rfind("synth:", 0) == 0)
                    continue;
                if (!std::filesystem::exists(sample.clean_ref))
                    continue;
                DegradationKind kind = *sample.labels.begin();
                Image clean = load_image(sample.clean_ref);
                if (clean.width != sample.image.width * (kind == DegradationKind::SuperResolution ? 2 : 1))
                    clean = resize(clean,
                                   sample.image.width * (kind == DegradationKind::SuperResolution ? 2 : 1),
                                   sample.image.height * (kind == DegradationKind::SuperResolution ? 2 : 1),
                                   ResizeMethod::Bicubic);
                Image restored = restore(kind, sample.image, registry);
                psnr_sum[kind_index(kind)] += psnr(restored, clean);
                ssim_sum[kind_index(kind)] += ssim(restored, clean);
                ++quality_count[kind_index(kind)];
            }

            std::ostringstream csv;
            csv << "class,sensitivity,specificity,specificity_conventional,"
                   "mean_psnr,mean_ssim\n";
            for (int i = 0; i < kKindCount; ++i) {
                csv << kind_name(static_cast<DegradationKind>(i)) << ',';
                csv << (cm.row_sum(i) > 0 ? std::to_string(sensitivity(cm, i)) : "") << ',';
                csv << (cm.col_sum(i) > 0 ? std::to_string(specificity(cm, i)) : "") << ',';
                csv << std::to_string(conventional_specificity(cm, i)) << ',';
                if (quality_count[i] > 0) {
                    csv << psnr_sum[i] / quality_count[i] << ','
                        << ssim_sum[i] / quality_count[i] << '\n';
                } else {
                    csv << ",\n";
                }
            }
            csv << "overall_accuracy," << accuracy(cm) << ",,,,\n";
            if (ev_out.empty()) {
                std::fputs(csv.str().c_str(), stdout);
            } else {
                std::ofstream out(ev_out);
                out << csv.str();
                std::printf("wrote %s\n", ev_out.c_str());
            }
        } else if (*bench_cmd) {
            Config cfg = load_base_config(bn_config);
            merge_extras(cfg, bench_cmd->remaining());
            if (!bn_model.empty())
                cfg.set("model", bn_model);
            if (!bn_source.empty())
                cfg.set("source", bn_source);
            if (bn_jobs > 0)
                cfg.set("jobs", std::to_string(bn_jobs));
            PipelineConfig pc = pipeline_config_from(cfg);
            BenchReport report = bench(pc, bn_reps);
            std::fputs(report.to_text().c_str(), stdout);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
