#include "adir/config.hpp"

#include <algorithm>
#include <fstream>

#include "adir/error.hpp"

namespace adir {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_quotes(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

} // namespace

Config Config::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw MissingFile("cannot open config " + path.string());
    Config cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = strip_quotes(trim(t.substr(eq + 1)));
        if (key.empty())
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    try {
        return std::stod(it->second);
    } catch (...) {
        throw ConfigError("key '" + key + "' is not a number: " + it->second);
    }
}

int Config::get_int(const std::string& key, int fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    try {
        return std::stoi(it->second);
    } catch (...) {
        throw ConfigError("key '" + key + "' is not an integer: " + it->second);
    }
}

uint64_t Config::get_u64(const std::string& key, uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    try {
        return std::stoull(it->second);
    } catch (...) {
        throw ConfigError("key '" + key + "' is not an integer: " + it->second);
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError("key '" + key + "' is not a boolean: " + it->second);
}

namespace {

// restorers.<kind>.<param> -> RestorerParams field
void apply_restorer_key(PipelineConfig& pc, const std::string& kind_str,
                        const std::string& param, const std::string& value,
                        const Config& cfg, const std::string& full_key) {
    auto kind = kind_from_name(kind_str);
    if (!kind)
        throw ConfigError("unknown degradation kind in key: " + full_key);
    RestorerParams& p = pc.restorer_params;
    auto as_double = [&] { return cfg.get_double(full_key, 0.0); };
    auto as_int = [&] { return cfg.get_int(full_key, 0); };

    if (param == "external") {
        ExternalHook hook;
        hook.command_template = value;
        auto existing = pc.external_hooks.find(*kind);
        if (existing != pc.external_hooks.end())
            hook.timeout_seconds = existing->second.timeout_seconds;
        pc.external_hooks[*kind] = hook;
        return;
    }
    if (param == "timeout") {
        pc.external_hooks[*kind].timeout_seconds = as_double();
        return;
    }

    switch (*kind) {
    case DegradationKind::Denoising:
        if (param == "radius") { p.denoise_radius = as_int(); return; }
        if (param == "sigma_s") { p.denoise_sigma_s = as_double(); return; }
        if (param == "sigma_r") { p.denoise_sigma_r = as_double(); return; }
        break;
    case DegradationKind::DehazingIndoor:
        if (param == "airlight") { p.indoor_airlight = as_double(); return; }
        [[fallthrough]];
    case DegradationKind::DehazingOutdoor:
        if (param == "window") { p.dehaze_window = as_int(); return; }
        if (param == "omega") { p.dehaze_omega = as_double(); return; }
        if (param == "t_min") { p.dehaze_t_min = as_double(); return; }
        break;
    case DegradationKind::Deblurring:
        if (param == "sigma") { p.deblur_sigma = as_double(); return; }
        if (param == "amount") { p.deblur_amount = as_double(); return; }
        break;
    case DegradationKind::Deraining:
        if (param == "median_len") { p.derain_median_len = as_int(); return; }
        if (param == "offsets") { p.derain_offsets = as_int(); return; }
        if (param == "blend") { p.derain_blend = as_double(); return; }
        break;
    case DegradationKind::Enhancement:
        if (param == "gamma") { p.enhance_gamma = as_double(); return; }
        if (param == "p_lo") { p.enhance_p_lo = as_double(); return; }
        if (param == "p_hi") { p.enhance_p_hi = as_double(); return; }
        break;
    case DegradationKind::SuperResolution:
        if (param == "unsharp_amount") { p.sr_unsharp_amount = as_double(); return; }
        if (param == "unsharp_sigma") { p.sr_unsharp_sigma = as_double(); return; }
        if (param == "max_dim") { p.sr_max_dim = as_int(); return; }
        break;
    }
    throw ConfigError("unknown restorer parameter: " + full_key);
}

} // namespace

PipelineConfig pipeline_config_from(const Config& config) {
    PipelineConfig pc;
    for (const auto& [key, value] : config.values()) {
        if (key == "model") {
            pc.model_path = value;
        } else if (key == "source") {
            pc.source = value;
        } else if (key == "out") {
            pc.out_dir = value;
        } else if (key == "log") {
            pc.log_path = value;
        } else if (key == "theta") {
            pc.theta = config.get_double(key, pc.theta);
            if (!(pc.theta > 0.0 && pc.theta < 1.0))
                throw ConfigError("theta must lie in (0,1)");
        } else if (key == "working_size") {
            pc.working_size = config.get_int(key, pc.working_size);
            if (pc.working_size < 16)
                throw ConfigError("working_size must be >= 16");
        } else if (key == "jobs") {
            pc.jobs = std::max(1, config.get_int(key, pc.jobs));
        } else if (key == "seed") {
            pc.seed = config.get_u64(key, pc.seed);
        } else if (key == "blend.mode") {
            if (value == "parallel")
                pc.blend_mode = BlendMode::Parallel;
            else if (value == "sequential")
                pc.blend_mode = BlendMode::Sequential;
            else
                throw ConfigError("blend.mode must be parallel or sequential");
        } else if (key.rfind("restorers.", 0) == 0) {
            std::string rest = key.substr(10);
            size_t dot = rest.find('.');
            if (dot == std::string::npos)
                throw ConfigError("expected restorers.<kind>.<param>: " + key);
            apply_restorer_key(pc, rest.substr(0, dot), rest.substr(dot + 1), value,
                               config, key);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
    return pc;
}

} // namespace adir
