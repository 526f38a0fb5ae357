#pragma once

#include <array>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "adir/image.hpp"
#include "adir/kinds.hpp"

namespace adir {

// Frozen defaults for the classical operators; every value is overridable
// through config keys restorers.<kind>.<name>.
struct RestorerParams {
    // Denoising: bilateral-weighted mean
    int denoise_radius = 2; // 5x5
    double denoise_sigma_s = 2.0;
    double denoise_sigma_r = 0.1;
    // Dehazing: dark channel prior
    int dehaze_window = 7;
    double dehaze_omega = 0.9;
    double dehaze_t_min = 0.15;
    double indoor_airlight = 0.85;
    // Deblurring: unsharp mask
    double deblur_sigma = 1.5;
    double deblur_amount = 1.2;
    // Deraining: min over shifted vertical medians
    int derain_median_len = 9;
    int derain_offsets = 5;
    double derain_blend = 0.7;
    // Enhancement: gamma lift + percentile stretch
    double enhance_gamma = 1.0 / 2.2;
    double enhance_p_lo = 0.01;
    double enhance_p_hi = 0.99;
    // SuperResolution: bicubic x2 + light unsharp
    double sr_unsharp_amount = 0.5;
    double sr_unsharp_sigma = 1.5;
    int sr_max_dim = 2048;
};

struct ExternalHook {
    std::string command_template; // must contain {in} and {out}
    double timeout_seconds = 10.0;
};

using RestoreFn = std::function<Image(const Image&)>;

// The seven restoration services phi_i. Built-in classical operators stand in
// for pretrained models; any kind can be redirected to an external command.
class RestorerRegistry {
public:
    explicit RestorerRegistry(RestorerParams params = {});

    const RestorerParams& params() const { return params_; }

    // replaces the function behind one kind (tests use this for stubs)
    void set_function(DegradationKind kind, RestoreFn fn);

    const std::optional<ExternalHook>& external(DegradationKind kind) const {
        return hooks_[kind_index(kind)];
    }

    Image run_builtin(DegradationKind kind, const Image& image) const;

    std::vector<std::string> warnings() const;
    void add_warning(const std::string& message) const;
    std::mutex& hook_mutex(DegradationKind kind) const {
        return *hook_locks_[kind_index(kind)];
    }

private:
    friend void set_external(DegradationKind, const std::string&, RestorerRegistry&,
                             double);
    RestorerParams params_;
    std::array<RestoreFn, kKindCount> fns_;
    std::array<std::optional<ExternalHook>, kKindCount> hooks_;
    mutable std::array<std::unique_ptr<std::mutex>, kKindCount> hook_locks_;
    mutable std::mutex warn_mutex_;
    mutable std::vector<std::string> warnings_;
};

// Runs the registered restorer for one kind. With an external hook configured
// the image round-trips through PPM files and the command; any failure falls
// back to the built-in operator and records a warning.
Image restore(DegradationKind kind, const Image& image, const RestorerRegistry& registry);

// Registers a subprocess hook. The template must contain both {in} and {out}
// placeholders; throws TemplateInvalid otherwise.
void set_external(DegradationKind kind, const std::string& command_template,
                  RestorerRegistry& registry, double timeout_seconds = 10.0);

} // namespace adir
