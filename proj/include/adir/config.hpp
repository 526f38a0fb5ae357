#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "adir/blend.hpp"
#include "adir/restore.hpp"

namespace adir {

// Flat dotted-key/value text config ("theta = 0.85", "blend.mode = parallel",
// comments start with '#'). Every key can also arrive as a CLI flag of the
// same dotted name.
class Config {
public:
    static Config from_file(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

struct PipelineConfig {
    std::filesystem::path model_path;
    std::string source;
    std::filesystem::path out_dir = "out";
    std::filesystem::path log_path; // defaults to out_dir / "frames.jsonl"
    double theta = 0.85;
    BlendMode blend_mode = BlendMode::Parallel;
    int working_size = 256;
    int jobs = 1;
    uint64_t seed = 1;
    RestorerParams restorer_params;
    std::map<DegradationKind, ExternalHook> external_hooks;

    std::filesystem::path effective_log_path() const {
        return log_path.empty() ? out_dir / "frames.jsonl" : log_path;
    }
};

// Validates keys and assembles the pipeline configuration.
// Throws ConfigError on unknown keys or malformed values.
PipelineConfig pipeline_config_from(const Config& config);

} // namespace adir
