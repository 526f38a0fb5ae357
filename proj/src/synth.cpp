#include "adir/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "adir/codec.hpp"
#include "adir/error.hpp"
#include "adir/ops.hpp"
#include "adir/rng.hpp"

namespace adir {

namespace {

using json = nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

// ---- per-kind synthesis --------------------------------------------------

Image add_gaussian_noise(const Image& in, float sigma, uint64_t seed) {
    Image out = in;
    const long long n = static_cast<long long>(in.pixel_count());
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(i)));
        for (int c = 0; c < 3; ++c) {
            size_t idx = static_cast<size_t>(i) * 3 + c;
            out.samples[idx] = clamp01(in.samples[idx] +
                                       sigma * static_cast<float>(rng.gaussian()));
        }
    }
    return out;
}

// atmospheric scattering: I = J t + A (1 - t)
Image apply_haze(const Image& in, float severity, bool outdoor) {
    Image out(in.width, in.height);
    const float k = outdoor ? 0.9f : 0.7f;
    const float airlight[3] = {outdoor ? 0.92f : 0.85f, outdoor ? 0.95f : 0.85f,
                               outdoor ? 0.98f : 0.85f};
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < in.height; ++y) {
        float vertical = 1.0f;
        if (outdoor && in.height > 1) {
            // denser haze toward the top of the frame; averages to 1 over rows
            vertical = 1.5f - static_cast<float>(y) / (in.height - 1);
        }
        float t = 1.0f - severity * k * vertical;
        t = std::clamp(t, 0.05f, 1.0f);
        for (int x = 0; x < in.width; ++x)
            for (int c = 0; c < 3; ++c)
                out.samples[out.index(x, y, c)] =
                    clamp01(in.at(x, y, c) * t + airlight[c] * (1.0f - t));
    }
    return out;
}

Kernel motion_kernel(int length, double angle) {
    int side = (length % 2 == 1) ? length : length + 1;
    Kernel k;
    k.width = side;
    k.height = side;
    k.taps.assign(static_cast<size_t>(side) * side, 0.0f);
    const double cx = side / 2, cy = side / 2;
    const double dx = std::cos(angle), dy = std::sin(angle);
    for (int i = 0; i < length; ++i) {
        double t = i - (length - 1) / 2.0;
        double px = cx + t * dx, py = cy + t * dy;
        int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
        double fx = px - x0, fy = py - y0;
        auto splat = [&](int x, int y, double w) {
            if (x >= 0 && x < side && y >= 0 && y < side)
                k.taps[static_cast<size_t>(y) * side + x] += static_cast<float>(w);
        };
        splat(x0, y0, (1 - fx) * (1 - fy));
        splat(x0 + 1, y0, fx * (1 - fy));
        splat(x0, y0 + 1, (1 - fx) * fy);
        splat(x0 + 1, y0 + 1, fx * fy);
    }
    float sum = 0.0f;
    for (float t : k.taps)
        sum += t;
    for (float& t : k.taps)
        t /= sum;
    return k;
}

Image apply_motion_blur(const Image& in, float severity, uint64_t seed) {
    int length = 1 + static_cast<int>(std::lround(severity * 14.0f));
    if (length <= 1)
        return in;
    Rng rng(mix_seed(seed, 0xb1u));
    double angle = rng.uniform(0.0, kPi);
    return convolve_rgb(in, motion_kernel(length, angle));
}

Image apply_rain(const Image& in, float severity, uint64_t seed) {
    Image out = in;
    const int w = in.width, h = in.height;
    const long long n_streaks =
        std::llround(static_cast<double>(severity) * 0.02 * w * h);
    const float add = severity * 0.6f;
    for (long long s = 0; s < n_streaks; ++s) {
        Rng rng(mix_seed(seed, 0x5eedULL + static_cast<uint64_t>(s)));
        double x = rng.uniform(0.0, w);
        double y = rng.uniform(0.0, h);
        int length = 8 + static_cast<int>(rng.below(17)); // 8..24 px
        double angle = rng.uniform(70.0, 110.0) * kPi / 180.0;
        double dx = std::cos(angle), dy = std::sin(angle);
        for (int i = 0; i < length; ++i) {
            int px = static_cast<int>(std::lround(x + i * dx));
            int py = static_cast<int>(std::lround(y + i * dy));
            if (px < 0 || px >= w || py < 0 || py >= h)
                continue;
            for (int c = 0; c < 3; ++c) {
                size_t idx = out.index(px, py, c);
                out.samples[idx] = clamp01(out.samples[idx] + add);
            }
        }
    }
    return out;
}

Image apply_low_light(const Image& in, float severity) {
    Image out(in.width, in.height);
    const float gamma = 1.0f + severity * 3.0f;
    const float contrast = 1.0f - severity * 0.5f;
    const size_t n = in.samples.size();
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        float v = std::pow(in.samples[static_cast<size_t>(i)], gamma);
        out.samples[static_cast<size_t>(i)] = clamp01(0.5f + (v - 0.5f) * contrast);
    }
    return out;
}

Image box_downsample2(const Image& in) {
    const int w2 = std::max(1, in.width / 2), h2 = std::max(1, in.height / 2);
    Image out(w2, h2);
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < h2; ++y)
        for (int x = 0; x < w2; ++x)
            for (int c = 0; c < 3; ++c) {
                float acc = in.at(2 * x, 2 * y, c);
                acc += in.at(std::min(2 * x + 1, in.width - 1), 2 * y, c);
                acc += in.at(2 * x, std::min(2 * y + 1, in.height - 1), c);
                acc += in.at(std::min(2 * x + 1, in.width - 1),
                             std::min(2 * y + 1, in.height - 1), c);
                out.samples[out.index(x, y, c)] = clamp01(acc * 0.25f);
            }
    return out;
}

// ---- clean scene generator -----------------------------------------------

float bilinear_grid(const std::vector<float>& grid, int gw, int gh, float u, float v) {
    float gx = u * (gw - 1), gy = v * (gh - 1);
    int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
    int x1 = std::min(x0 + 1, gw - 1), y1 = std::min(y0 + 1, gh - 1);
    float fx = gx - x0, fy = gy - y0;
    float a = grid[static_cast<size_t>(y0) * gw + x0] * (1 - fx) +
              grid[static_cast<size_t>(y0) * gw + x1] * fx;
    float b = grid[static_cast<size_t>(y1) * gw + x0] * (1 - fx) +
              grid[static_cast<size_t>(y1) * gw + x1] * fx;
    return a * (1 - fy) + b * fy;
}

} // namespace

Image make_clean_scene(int width, int height, uint64_t seed) {
    Rng rng(mix_seed(seed, 0xc1ea7ULL));
    Image img(width, height);

    // gradient background between two mid-bright colors
    float c0[3], c1[3];
    for (int c = 0; c < 3; ++c) {
        c0[c] = static_cast<float>(rng.uniform(0.15, 0.75));
        c1[c] = static_cast<float>(rng.uniform(0.15, 0.75));
    }
    const double dir = rng.uniform(0.0, 2.0 * kPi);
    const float gx = static_cast<float>(std::cos(dir)), gy = static_cast<float>(std::sin(dir));

    // coarse value-noise grid for texture
    const int gw = 9, gh = 9;
    std::vector<float> grid(static_cast<size_t>(gw) * gh);
    for (auto& g : grid)
        g = static_cast<float>(rng.uniform(-1.0, 1.0));

    for (int y = 0; y < height; ++y) {
        float v = height > 1 ? static_cast<float>(y) / (height - 1) : 0.0f;
        for (int x = 0; x < width; ++x) {
            float u = width > 1 ? static_cast<float>(x) / (width - 1) : 0.0f;
            float t = 0.5f + 0.5f * (gx * (u - 0.5f) + gy * (v - 0.5f)) * 2.0f;
            t = std::clamp(t, 0.0f, 1.0f);
            float tex = 0.05f * bilinear_grid(grid, gw, gh, u, v);
            for (int c = 0; c < 3; ++c)
                img.set(x, y, c, c0[c] * (1 - t) + c1[c] * t + tex);
        }
    }

    // solid rectangles with sharp edges; the first two span the tonal
    // extremes so every scene carries deep shadows and bright content
    int n_rects = 5 + static_cast<int>(rng.below(5));
    for (int r = 0; r < n_rects; ++r) {
        int rw = width / 8 + static_cast<int>(rng.below(std::max(1, width / 4)));
        int rh = height / 8 + static_cast<int>(rng.below(std::max(1, height / 4)));
        int x0 = static_cast<int>(rng.below(std::max(1, width - rw)));
        int y0 = static_cast<int>(rng.below(std::max(1, height - rh)));
        float col[3];
        for (int c = 0; c < 3; ++c) {
            if (r == 0)
                col[c] = static_cast<float>(rng.uniform(0.02, 0.12));
            else if (r == 1)
                col[c] = static_cast<float>(rng.uniform(0.85, 0.97));
            else
                col[c] = static_cast<float>(rng.uniform(0.05, 0.95));
        }
        // most surfaces get a saturated color (one suppressed channel)
        if (r >= 2 && rng.below(10) < 6)
            col[rng.below(3)] = static_cast<float>(rng.uniform(0.02, 0.2));
        for (int y = y0; y < std::min(height, y0 + rh); ++y)
            for (int x = x0; x < std::min(width, x0 + rw); ++x)
                for (int c = 0; c < 3; ++c)
                    img.set(x, y, c, col[c]);
    }

    // faint per-pixel grain so the scene is not exactly piecewise flat
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        Rng px(mix_seed(seed ^ 0x9a11ULL, i));
        for (int c = 0; c < 3; ++c) {
            size_t idx = i * 3 + c;
            img.samples[idx] =
                clamp01(img.samples[idx] + 0.004f * static_cast<float>(px.gaussian()));
        }
    }
    return img;
}

Image apply_degradation(const Image& clean, DegradationKind kind, float severity,
                        uint64_t seed) {
    if (severity <= 0.0f)
        return clean;
    switch (kind) {
    case DegradationKind::Denoising:
        return add_gaussian_noise(clean, severity * 0.12f, seed);
    case DegradationKind::DehazingIndoor:
        return apply_haze(clean, severity, false);
    case DegradationKind::DehazingOutdoor:
        return apply_haze(clean, severity, true);
    case DegradationKind::Deblurring:
        return apply_motion_blur(clean, severity, seed);
    case DegradationKind::Deraining:
        return apply_rain(clean, severity, seed);
    case DegradationKind::Enhancement:
        return apply_low_light(clean, severity);
    case DegradationKind::SuperResolution:
        return box_downsample2(clean);
    }
    return clean;
}

std::string LabeledSample::stratum_key() const {
    if (labels.empty())
        return "clean";
    std::string key;
    for (DegradationKind k : labels) {
        if (!key.empty())
            key += '+';
        key += kind_name(k);
    }
    return key;
}

int CorpusRecipe::total() const {
    int n = clean_count;
    for (int c : per_kind_counts)
        n += c;
    for (const auto& [kinds, count] : combos)
        n += count;
    return n;
}

namespace {

Corpus build_corpus_impl(const std::vector<std::filesystem::path>& clean_files,
                         int synthetic_scene_count, const CorpusRecipe& recipe,
                         uint64_t seed) {
    // requested label sets, in a fixed order: singles, combos, cleans
    std::vector<std::set<DegradationKind>> requests;
    for (DegradationKind k : all_kinds())
        for (int i = 0; i < recipe.per_kind_counts[kind_index(k)]; ++i)
            requests.push_back({k});
    for (const auto& [kinds, count] : recipe.combos)
        for (int i = 0; i < count; ++i)
            requests.push_back(kinds);
    for (int i = 0; i < recipe.clean_count; ++i)
        requests.push_back({});

    const size_t n_clean =
        clean_files.empty() ? static_cast<size_t>(synthetic_scene_count) : clean_files.size();

    // decode / generate each clean source once, already at working size
    std::vector<Image> clean_cache(n_clean);
    std::vector<std::string> clean_refs(n_clean);
    for (size_t i = 0; i < n_clean; ++i) {
        if (!clean_files.empty()) {
            clean_cache[i] = load_image(clean_files[i]);
            clean_refs[i] = clean_files[i].string();
        } else {
            clean_cache[i] = make_clean_scene(recipe.working_width, recipe.working_height,
                                              mix_seed(seed ^ 0x5ce9eULL, i));
            clean_refs[i] = "synth:scene:" + std::to_string(i);
        }
        if (clean_cache[i].width != recipe.working_width ||
            clean_cache[i].height != recipe.working_height)
            clean_cache[i] = resize(clean_cache[i], recipe.working_width,
                                    recipe.working_height, ResizeMethod::Bicubic);
    }

    Corpus corpus;
    if (clean_files.empty())
        for (size_t i = 0; i < n_clean; ++i)
            corpus.clean_sources.emplace_back(clean_refs[i], clean_cache[i]);
    corpus.samples.resize(requests.size());
    for (size_t i = 0; i < requests.size(); ++i) {
        const uint64_t sample_seed = mix_seed(seed, i);
        Rng rng(sample_seed);
        const Image& clean = clean_cache[i % n_clean];
        const std::string& clean_ref = clean_refs[i % n_clean];

        LabeledSample sample;
        sample.labels = requests[i];
        sample.seed = sample_seed;
        sample.clean_ref = clean_ref;
        Image degraded = clean;
        for (DegradationKind k : sample.labels) { // std::set iterates in index order
            float sev = static_cast<float>(rng.uniform(recipe.severity_lo, recipe.severity_hi));
            sample.severities[k] = sev;
            degraded = apply_degradation(degraded, k, sev, mix_seed(sample_seed, kind_index(k)));
        }
        if (recipe.sr_upsample_back &&
            sample.labels.count(DegradationKind::SuperResolution))
            degraded = resize(degraded, recipe.working_width, recipe.working_height,
                              ResizeMethod::Nearest);
        sample.image = std::move(degraded);
        corpus.samples[i] = std::move(sample);
    }
    return corpus;
}

} // namespace

Corpus build_corpus(const std::filesystem::path& clean_dir, const CorpusRecipe& recipe,
                    uint64_t seed) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(clean_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(clean_dir)) {
            if (!entry.is_regular_file())
                continue;
            auto ext = entry.path().extension().string();
            if (ext == ".ppm" || ext == ".png")
                files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw EmptyCleanSet("no decodable images in " + clean_dir.string());
    return build_corpus_impl(files, 0, recipe, seed);
}

Corpus build_corpus_synthetic(int clean_scene_count, const CorpusRecipe& recipe,
                              uint64_t seed) {
    if (clean_scene_count < 1)
        throw EmptyCleanSet("clean_scene_count must be >= 1");
    return build_corpus_impl({}, clean_scene_count, recipe, seed);
}

std::pair<Corpus, Corpus> stratified_split(const Corpus& corpus, double test_fraction,
                                           uint64_t seed) {
    if (corpus.samples.empty())
        throw StratumTooSmall("empty corpus");

    std::map<std::string, std::vector<size_t>> strata;
    for (size_t i = 0; i < corpus.samples.size(); ++i)
        strata[corpus.samples[i].stratum_key()].push_back(i);
    for (const auto& [key, members] : strata)
        if (members.size() < 2)
            throw StratumTooSmall("stratum '" + key + "' has fewer than 2 samples");

    // Largest-remainder apportionment of round(N * fraction) test slots across
    // strata; keeps every stratum within one sample of the exact proportion.
    const double total_quota = static_cast<double>(corpus.samples.size()) * test_fraction;
    long long target = std::llround(total_quota);
    std::vector<std::pair<std::string, size_t>> order; // deterministic stratum order
    for (const auto& [key, members] : strata)
        order.emplace_back(key, members.size());

    std::map<std::string, size_t> test_counts;
    std::vector<std::pair<double, std::string>> remainders;
    long long assigned = 0;
    for (const auto& [key, size] : order) {
        double quota = static_cast<double>(size) * test_fraction;
        size_t base = static_cast<size_t>(std::floor(quota));
        test_counts[key] = base;
        assigned += static_cast<long long>(base);
        remainders.emplace_back(quota - std::floor(quota), key);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return a.second < b.second;
    });
    for (size_t i = 0; assigned < target && i < remainders.size(); ++i, ++assigned)
        ++test_counts[remainders[i].second];
    // both splits nonempty within each stratum
    for (auto& [key, count] : test_counts) {
        size_t size = strata[key].size();
        if (count == 0)
            count = 1;
        if (count >= size)
            count = size - 1;
    }

    std::vector<bool> is_test(corpus.samples.size(), false);
    for (auto& [key, members] : strata) {
        uint64_t h = 1469598103934665603ULL; // FNV-1a over the stratum key
        for (char c : key)
            h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
        Rng rng(mix_seed(seed, h));
        std::vector<size_t> pool = members;
        for (size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[rng.below(i)]);
        for (size_t i = 0; i < test_counts[key]; ++i)
            is_test[pool[i]] = true;
    }

    Corpus train, test;
    train.clean_sources = corpus.clean_sources;
    test.clean_sources = corpus.clean_sources;
    for (size_t i = 0; i < corpus.samples.size(); ++i)
        (is_test[i] ? test : train).samples.push_back(corpus.samples[i]);
    return {std::move(train), std::move(test)};
}

namespace {

json sample_to_json(const LabeledSample& sample, const std::string& image_path) {
    json labels = json::array();
    json severities = json::object();
    for (DegradationKind k : sample.labels) {
        labels.push_back(kind_name(k));
        severities[kind_name(k)] = sample.severities.at(k);
    }
    return json{{"path", image_path},
                {"labels", labels},
                {"severities", severities},
                {"seed", sample.seed},
                {"clean_ref", sample.clean_ref}};
}

} // namespace

void write_manifest(const Corpus& corpus, const std::filesystem::path& manifest_path) {
    std::ofstream out(manifest_path);
    if (!out)
        throw UnwritableManifest("cannot write " + manifest_path.string());
    for (size_t i = 0; i < corpus.samples.size(); ++i) {
        const auto& s = corpus.samples[i];
        std::string rel = s.image_path.empty() ? "sample_" + std::to_string(i) : s.image_path;
        out << sample_to_json(s, rel).dump() << '\n';
    }
    if (!out)
        throw UnwritableManifest("write failed: " + manifest_path.string());
}

std::filesystem::path write_corpus(Corpus& corpus, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    // materialize generated clean scenes so clean_ref always names a file
    std::map<std::string, std::string> clean_names;
    for (size_t i = 0; i < corpus.clean_sources.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "clean_%04zu.ppm", i);
        save_image(corpus.clean_sources[i].second, out_dir / name);
        clean_names[corpus.clean_sources[i].first] = name;
    }

    auto manifest_path = out_dir / "manifest.jsonl";
    std::ofstream out(manifest_path);
    if (!out)
        throw UnwritableManifest("cannot write " + manifest_path.string());
    for (size_t i = 0; i < corpus.samples.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%06zu.ppm", i);
        save_image(corpus.samples[i].image, out_dir / name);
        corpus.samples[i].image_path = name;
        auto renamed = clean_names.find(corpus.samples[i].clean_ref);
        if (renamed != clean_names.end())
            corpus.samples[i].clean_ref = renamed->second;
        out << sample_to_json(corpus.samples[i], name).dump() << '\n';
    }
    if (!out)
        throw UnwritableManifest("write failed: " + manifest_path.string());
    corpus.manifest_path = manifest_path;
    return manifest_path;
}

Corpus load_corpus(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in)
        throw MissingFile("cannot open manifest " + manifest_path.string());
    Corpus corpus;
    corpus.manifest_path = manifest_path;
    const auto base = manifest_path.parent_path();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw CorruptData("bad manifest line in " + manifest_path.string());
        LabeledSample sample;
        for (const auto& name : j.at("labels")) {
            auto kind = kind_from_name(name.get<std::string>());
            if (!kind)
                throw CorruptData("unknown degradation kind in manifest");
            sample.labels.insert(*kind);
        }
        for (auto& [name, sev] : j.at("severities").items()) {
            auto kind = kind_from_name(name);
            if (kind)
                sample.severities[*kind] = sev.get<float>();
        }
        sample.seed = j.at("seed").get<uint64_t>();
        sample.clean_ref = j.value("clean_ref", "");
        // relative clean refs resolve against the manifest's directory
        if (!sample.clean_ref.empty()) {
            std::filesystem::path ref = sample.clean_ref;
            if (ref.is_relative() && std::filesystem::exists(base / ref))
                sample.clean_ref = (base / ref).string();
        }
        sample.image_path = j.at("path").get<std::string>();
        std::filesystem::path img_path = sample.image_path;
        if (img_path.is_relative())
            img_path = base / img_path;
        sample.image = load_image(img_path);
        corpus.samples.push_back(std::move(sample));
    }
    return corpus;
}

} // namespace adir
