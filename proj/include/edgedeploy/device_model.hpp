#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace edgedeploy {

/// One DVFS operating point. Frequencies are kept as integer kHz so the
/// bundled tables compare bit-exactly after a round trip.
struct VfLevel {
    std::uint32_t khz = 0;
    std::size_t index = 0;

    [[nodiscard]] double hz() const { return static_cast<double>(khz) * 1e3; }
    [[nodiscard]] double ghz() const { return static_cast<double>(khz) * 1e-6; }

    friend bool operator==(const VfLevel&, const VfLevel&) = default;
};

struct CpuCluster {
    std::string name;
    int core_count = 1;
    std::vector<VfLevel> levels;
    std::uint64_t l2_cache_bytes = 0;
    double power_coeff = 0.0; // W / GHz^3

    [[nodiscard]] const VfLevel& max_level() const { return levels.back(); }

    friend bool operator==(const CpuCluster&, const CpuCluster&) = default;
};

/// Immutable description of a heterogeneous CPU-GPU platform and the
/// parametric power model standing in for a hardware power monitor.
struct DeviceSpec {
    std::string name;
    std::vector<CpuCluster> clusters;
    std::vector<VfLevel> gpu_levels;
    double gpu_power_coeff = 0.0; // W / GHz^3
    double idle_power = 0.0;      // W

    /// Throws ConfigError on any broken invariant.
    void validate() const;

    [[nodiscard]] const VfLevel& gpu_max() const { return gpu_levels.back(); }
    [[nodiscard]] std::size_t total_cpu_levels() const;
    /// Cluster with the highest top frequency (the "big" cluster).
    [[nodiscard]] std::size_t performance_cluster() const;

    friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;
};

struct PlatformState {
    std::size_t active_cluster = 0;
    std::size_t cpu_level = 0;
    std::size_t gpu_level = 0;

    friend bool operator==(const PlatformState&, const PlatformState&) = default;
};

/// Builds an indexed, ascending level table from raw kHz values.
[[nodiscard]] std::vector<VfLevel> make_levels(const std::vector<std::uint32_t>& khz);

/// Parses a JSON device document (comments allowed) and validates it.
[[nodiscard]] DeviceSpec load_device_spec(std::string_view document);
[[nodiscard]] DeviceSpec load_device_spec_file(const std::filesystem::path& path);
[[nodiscard]] std::string serialize_device_spec(const DeviceSpec& spec);

/// Bundled specs by name; currently only "oneplus8t".
[[nodiscard]] DeviceSpec bundled_device(std::string_view name);
[[nodiscard]] std::string_view bundled_device_document(std::string_view name);

/// Accepts a bundled name or a path to a JSON document.
[[nodiscard]] DeviceSpec resolve_device(const std::string& name_or_path);

/// Average platform power in watts:
///   idle + busy * (c_cluster * f_cpu^3 + c_gpu * f_gpu^3), f in GHz.
[[nodiscard]] double power_draw(const DeviceSpec& spec, const PlatformState& state,
                                double busy_fraction);

/// Power attributable to inference, i.e. power_draw minus idle power.
[[nodiscard]] double inference_power(const DeviceSpec& spec, const PlatformState& state,
                                     double busy_fraction);

void check_state(const DeviceSpec& spec, const PlatformState& state);

} // namespace edgedeploy
