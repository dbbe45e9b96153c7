#pragma once

#include "edgedeploy/environment.hpp"
#include "edgedeploy/marl.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgedeploy {

/// Everything a CLI run depends on. Loaded from a JSON document (comments
/// allowed), then overridden by flags.
struct RunConfig {
    std::string device = "oneplus8t"; // bundled name or JSON path
    std::string model = "yolo_like";  // bundled detector profile
    std::optional<std::string> lut;   // bundled name or CSV path replacing the profile's table
    std::optional<std::string> trace; // CSV path; generated from `gen` when absent
    TraceGenParams gen;
    double fps = 30.0;
    double duration_ms = 40000.0;

    std::string strategy = "origin";
    std::vector<std::string> strategies = {"origin", "static_0.7"}; // compare
    double rt_tar_ms = 33.0;
    double alpha = 1.0;
    PenaltyConfig penalty;
    double accuracy_tolerance = 5.0;
    SelectorConfig selector;
    std::vector<std::size_t> offsets = {1, 3, 6, 12};
    std::optional<std::size_t> queue_capacity;
    std::optional<std::size_t> cluster;
    double train_noise = 0.03;
    double eval_noise = 0.0;

    MarlConfig marl;
    std::size_t steps = 20000;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds = {1};
    std::size_t oracle_cap = 100000;
    unsigned threads = 0;

    std::string out = "out";
    std::optional<std::string> checkpoint;

    /// Throws ConfigError naming the first bad field.
    void validate() const;
};

/// Unknown keys are errors so typos do not silently fall back to defaults.
[[nodiscard]] RunConfig parse_run_config(std::string_view document);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical JSON with sorted keys; parsing it back reproduces the same string.
[[nodiscard]] std::string to_json_string(const RunConfig& cfg);

/// FNV-1a over the canonical JSON, as 16 hex digits.
[[nodiscard]] std::string config_hash(const RunConfig& cfg);
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes);

/// Applies "key=value" pairs (comma separated) to the trace generator and
/// clears any trace path. Keys: the TraceGenParams fields, fps, duration_ms.
void apply_gen_overrides(RunConfig& cfg, std::string_view overrides);

/// Loads the device, model and trace the config names and builds the scenario.
[[nodiscard]] Scenario build_scenario(const RunConfig& cfg);
[[nodiscard]] FrameTrace load_or_generate_trace(const RunConfig& cfg);

} // namespace edgedeploy
