#include "adir/restore.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <signal.h>
#include <sys/wait.h>
#include <time.h>
#include <unistd.h>

#include "adir/codec.hpp"
#include "adir/error.hpp"
#include "adir/ops.hpp"

namespace adir {

namespace {

// ---- built-in operators ----------------------------------------------------

Image bilateral_denoise(const Image& in, const RestorerParams& p) {
    const int w = in.width, h = in.height, r = p.denoise_radius;
    const float inv_2ss = static_cast<float>(1.0 / (2.0 * p.denoise_sigma_s * p.denoise_sigma_s));
    const float inv_2sr = static_cast<float>(1.0 / (2.0 * p.denoise_sigma_r * p.denoise_sigma_r));
    std::vector<float> spatial((2 * r + 1) * (2 * r + 1));
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            spatial[(dy + r) * (2 * r + 1) + dx + r] =
                std::exp(-(dx * dx + dy * dy) * inv_2ss);

    Image out(w, h);
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                const float center = in.at(x, y, c);
                float acc = 0.0f, norm = 0.0f;
                for (int dy = -r; dy <= r; ++dy) {
                    int sy = std::clamp(y + dy, 0, h - 1);
                    for (int dx = -r; dx <= r; ++dx) {
                        int sx = std::clamp(x + dx, 0, w - 1);
                        float v = in.at(sx, sy, c);
                        float d = v - center;
                        float wgt = spatial[(dy + r) * (2 * r + 1) + dx + r] *
                                    std::exp(-d * d * inv_2sr);
                        acc += wgt * v;
                        norm += wgt;
                    }
                }
                out.samples[out.index(x, y, c)] = clamp01(acc / norm);
            }
        }
    }
    return out;
}

std::vector<float> min_filter_raw(const std::vector<float>& v, int w, int h, int radius) {
    std::vector<float> tmp(v.size()), out(v.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float m = std::numeric_limits<float>::max();
            for (int k = -radius; k <= radius; ++k)
                m = std::min(m, v[static_cast<size_t>(y) * w + std::clamp(x + k, 0, w - 1)]);
            tmp[static_cast<size_t>(y) * w + x] = m;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float m = std::numeric_limits<float>::max();
            for (int k = -radius; k <= radius; ++k)
                m = std::min(m, tmp[static_cast<size_t>(std::clamp(y + k, 0, h - 1)) * w + x]);
            out[static_cast<size_t>(y) * w + x] = m;
        }
    return out;
}

Image dark_channel_dehaze(const Image& in, const RestorerParams& p, bool outdoor) {
    const int w = in.width, h = in.height;
    const size_t n = static_cast<size_t>(w) * h;
    const int radius = p.dehaze_window / 2;

    std::vector<float> rgb_min(n);
    for (size_t i = 0; i < n; ++i) {
        const float* px = &in.samples[i * 3];
        rgb_min[i] = std::min(px[0], std::min(px[1], px[2]));
    }
    std::vector<float> dark = min_filter_raw(rgb_min, w, h, radius);

    float airlight[3];
    if (outdoor) {
        // mean color of the brightest 0.1% of the dark channel
        std::vector<float> sorted = dark;
        size_t cut = std::max<size_t>(1, n / 1000);
        std::nth_element(sorted.begin(), sorted.end() - cut, sorted.end());
        float threshold = sorted[n - cut];
        double acc[3] = {0, 0, 0};
        size_t count = 0;
        for (size_t i = 0; i < n; ++i)
            if (dark[i] >= threshold) {
                for (int c = 0; c < 3; ++c)
                    acc[c] += in.samples[i * 3 + c];
                ++count;
            }
        for (int c = 0; c < 3; ++c)
            airlight[c] = std::clamp(static_cast<float>(acc[c] / count), 0.05f, 1.0f);
    } else {
        airlight[0] = airlight[1] = airlight[2] = static_cast<float>(p.indoor_airlight);
    }

    // transmission from the airlight-normalized dark channel
    std::vector<float> norm_min(n);
    for (size_t i = 0; i < n; ++i) {
        const float* px = &in.samples[i * 3];
        norm_min[i] = std::min({px[0] / airlight[0], px[1] / airlight[1], px[2] / airlight[2]});
    }
    std::vector<float> norm_dark = min_filter_raw(norm_min, w, h, radius);

    Image out(w, h);
    const float omega = static_cast<float>(p.dehaze_omega);
    const float t_min = static_cast<float>(p.dehaze_t_min);
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        float t = std::max(t_min, 1.0f - omega * norm_dark[static_cast<size_t>(i)]);
        for (int c = 0; c < 3; ++c) {
            float v = in.samples[static_cast<size_t>(i) * 3 + c];
            out.samples[static_cast<size_t>(i) * 3 + c] =
                clamp01((v - airlight[c]) / t + airlight[c]);
        }
    }
    return out;
}

Image unsharp(const Image& in, double sigma, double amount) {
    Image low = gaussian_blur(in, sigma);
    Image out(in.width, in.height);
    const float a = static_cast<float>(amount);
    for (size_t i = 0; i < in.samples.size(); ++i)
        out.samples[i] = clamp01(in.samples[i] + a * (in.samples[i] - low.samples[i]));
    return out;
}

// min over horizontally shifted vertical medians: thin bright streaks are
// missed by the shifted windows, so the min recovers the background under them
Image derain(const Image& in, const RestorerParams& p) {
    const int w = in.width, h = in.height;
    const int half_len = p.derain_median_len / 2;
    const int half_off = p.derain_offsets / 2;
    const float blend = static_cast<float>(p.derain_blend);
    Image out(w, h);
    std::vector<float> med(static_cast<size_t>(w) * h);

    for (int c = 0; c < 3; ++c) {
        #pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y) {
            std::vector<float> win(p.derain_median_len);
            for (int x = 0; x < w; ++x) {
                for (int k = -half_len; k <= half_len; ++k)
                    win[k + half_len] = in.at(x, std::clamp(y + k, 0, h - 1), c);
                std::nth_element(win.begin(), win.begin() + half_len, win.end());
                med[static_cast<size_t>(y) * w + x] = win[half_len];
            }
        }
        #pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                float m = std::numeric_limits<float>::max();
                for (int dx = -half_off; dx <= half_off; ++dx)
                    m = std::min(m, med[static_cast<size_t>(y) * w + std::clamp(x + dx, 0, w - 1)]);
                size_t idx = in.index(x, y, c);
                out.samples[idx] = clamp01(blend * m + (1.0f - blend) * in.samples[idx]);
            }
        }
    }
    return out;
}

// stretch [p1, p99] of the luminance to full scale, then lift the gamma;
// the stretch undoes the linear part of a low-light curve, the lift the rest
Image enhance(const Image& in, const RestorerParams& p) {
    const size_t n = in.samples.size();
    Plane lum = to_luminance(in);
    std::vector<float> sorted = lum.samples;
    auto percentile = [&](double q) {
        size_t rank = static_cast<size_t>(q * (sorted.size() - 1));
        std::nth_element(sorted.begin(), sorted.begin() + rank, sorted.end());
        return sorted[rank];
    };
    float lo = percentile(p.enhance_p_lo);
    float hi = percentile(p.enhance_p_hi);

    Image out(in.width, in.height);
    const float g = static_cast<float>(p.enhance_gamma);
    const float scale = hi - lo > 1e-6f ? 1.0f / (hi - lo) : 1.0f;
    const float off = hi - lo > 1e-6f ? lo : 0.0f;
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        float stretched = clamp01((in.samples[static_cast<size_t>(i)] - off) * scale);
        out.samples[static_cast<size_t>(i)] = clamp01(std::pow(stretched, g));
    }
    return out;
}

Image super_resolve(const Image& in, const RestorerParams& p) {
    if (in.width > p.sr_max_dim || in.height > p.sr_max_dim)
        throw OversizeForUpscale("input exceeds " + std::to_string(p.sr_max_dim) +
                                 " px before upscaling");
    Image up = resize(in, in.width * 2, in.height * 2, ResizeMethod::Bicubic);
    return unsharp(up, p.sr_unsharp_sigma, p.sr_unsharp_amount);
}

// ---- external hook ---------------------------------------------------------

// run through /bin/sh, kill on deadline; returns exit status or -1
int run_with_timeout(const std::string& command, double timeout_seconds) {
    pid_t pid = fork();
    if (pid < 0)
        return -1;
    if (pid == 0) {
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    const double deadline = timeout_seconds;
    double waited = 0.0;
    for (;;) {
        int status = 0;
        pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid)
            return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        if (r < 0)
            return -1;
        if (waited >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            return -1;
        }
        struct timespec ts {0, 10 * 1000 * 1000}; // 10 ms
        nanosleep(&ts, nullptr);
        waited += 0.01;
    }
}

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
    size_t pos;
    while ((pos = tmpl.find(key)) != std::string::npos)
        tmpl.replace(pos, key.size(), value);
    return tmpl;
}

std::atomic<uint64_t> g_hook_counter{0};

Image run_external(DegradationKind kind, const Image& image,
                   const RestorerRegistry& registry, const ExternalHook& hook) {
    std::lock_guard<std::mutex> lock(registry.hook_mutex(kind));

    const uint64_t id = g_hook_counter.fetch_add(1);
    auto dir = std::filesystem::temp_directory_path();
    auto in_path = dir / ("adir_hook_" + std::to_string(getpid()) + "_" +
                          std::to_string(id) + "_in.ppm");
    auto out_path = dir / ("adir_hook_" + std::to_string(getpid()) + "_" +
                           std::to_string(id) + "_out.ppm");

    auto cleanup = [&] {
        std::error_code ec;
        std::filesystem::remove(in_path, ec);
        std::filesystem::remove(out_path, ec);
    };

    try {
        save_image(image, in_path);
        std::string cmd = substitute(hook.command_template, "{in}", in_path.string());
        cmd = substitute(cmd, "{out}", out_path.string());
        int status = run_with_timeout(cmd, hook.timeout_seconds);
        if (status != 0) {
            registry.add_warning("external " + kind_name(kind) +
                                 (status < 0 ? " timed out or crashed" : " exited nonzero") +
                                 ", using built-in");
            cleanup();
            return registry.run_builtin(kind, image);
        }
        Image result = load_image(out_path);
        cleanup();
        return result;
    } catch (const Error& e) {
        registry.add_warning("external " + kind_name(kind) + " failed (" + e.what() +
                             "), using built-in");
        cleanup();
        return registry.run_builtin(kind, image);
    }
}

} // namespace

RestorerRegistry::RestorerRegistry(RestorerParams params) : params_(params) {
    for (auto& lock : hook_locks_)
        lock = std::make_unique<std::mutex>();
    RestorerParams p = params_;
    fns_[kind_index(DegradationKind::Denoising)] = [p](const Image& im) {
        return bilateral_denoise(im, p);
    };
    fns_[kind_index(DegradationKind::DehazingIndoor)] = [p](const Image& im) {
        return dark_channel_dehaze(im, p, false);
    };
    fns_[kind_index(DegradationKind::DehazingOutdoor)] = [p](const Image& im) {
        return dark_channel_dehaze(im, p, true);
    };
    fns_[kind_index(DegradationKind::Deblurring)] = [p](const Image& im) {
        return unsharp(im, p.deblur_sigma, p.deblur_amount);
    };
    fns_[kind_index(DegradationKind::Deraining)] = [p](const Image& im) {
        return derain(im, p);
    };
    fns_[kind_index(DegradationKind::Enhancement)] = [p](const Image& im) {
        return enhance(im, p);
    };
    fns_[kind_index(DegradationKind::SuperResolution)] = [p](const Image& im) {
        return super_resolve(im, p);
    };
}

void RestorerRegistry::set_function(DegradationKind kind, RestoreFn fn) {
    fns_[kind_index(kind)] = std::move(fn);
}

Image RestorerRegistry::run_builtin(DegradationKind kind, const Image& image) const {
    return fns_[kind_index(kind)](image);
}

std::vector<std::string> RestorerRegistry::warnings() const {
    std::lock_guard<std::mutex> lock(warn_mutex_);
    return warnings_;
}

void RestorerRegistry::add_warning(const std::string& message) const {
    std::lock_guard<std::mutex> lock(warn_mutex_);
    warnings_.push_back(message);
    std::fprintf(stderr, "warning: %s\n", message.c_str());
}

Image restore(DegradationKind kind, const Image& image, const RestorerRegistry& registry) {
    const auto& hook = registry.external(kind);
    if (hook)
        return run_external(kind, image, registry, *hook);
    return registry.run_builtin(kind, image);
}

void set_external(DegradationKind kind, const std::string& command_template,
                  RestorerRegistry& registry, double timeout_seconds) {
    if (command_template.find("{in}") == std::string::npos ||
        command_template.find("{out}") == std::string::npos)
        throw TemplateInvalid("command template needs {in} and {out}");
    ExternalHook hook;
    hook.command_template = command_template;
    hook.timeout_seconds = timeout_seconds;
    registry.hooks_[kind_index(kind)] = std::move(hook);
}

} // namespace adir
