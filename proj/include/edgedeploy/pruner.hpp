#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edgedeploy {

struct LutEntry {
    double ratio = 0.0;        // fraction of weights pruned
    double latency_ms = 0.0;   // at the selected cluster's top V/F levels
    double map_points = 0.0;   // mAP, percent

    friend bool operator==(const LutEntry&, const LutEntry&) = default;
};

/// Pruning ratio -> (latency, accuracy) table recorded offline per model.
class PruningLut {
public:
    PruningLut() = default;
    /// Validates: nonempty, ratios strictly increasing in [0, 1) starting at
    /// 0, latency and mAP nonincreasing.
    explicit PruningLut(std::vector<LutEntry> entries);

    [[nodiscard]] const std::vector<LutEntry>& entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] double dense_latency() const { return entries_.front().latency_ms; }
    [[nodiscard]] double dense_map() const { return entries_.front().map_points; }

    /// Exact entry when stored, linear interpolation between neighbours
    /// otherwise. Throws ConfigError outside the table range.
    [[nodiscard]] double latency_at(double ratio) const;
    [[nodiscard]] double map_at(double ratio) const;
    [[nodiscard]] std::vector<double> ratios() const;

    friend bool operator==(const PruningLut&, const PruningLut&) = default;

private:
    template <typename Field>
    [[nodiscard]] double interpolate(double ratio, Field field) const;

    std::vector<LutEntry> entries_;
};

struct PruneBounds {
    double lower = 0.0;
    double upper = 0.0;

    [[nodiscard]] bool contains(double ratio) const { return ratio >= lower && ratio <= upper; }
};

/// lower: largest ratio that keeps the dense mAP; upper: largest ratio whose
/// mAP stays within `accuracy_tolerance` points of dense.
[[nodiscard]] PruneBounds compute_bounds(const PruningLut& lut, double accuracy_tolerance);

/// Clamps the requested ratio into the bounds. Switching is instantaneous.
[[nodiscard]] double reconfigure(double current_ratio, double target_ratio,
                                 const PruneBounds& bounds);

/// Stored ratios that fall inside the bounds.
[[nodiscard]] std::vector<double> ratios_within(const PruningLut& lut, const PruneBounds& bounds);

/// CSV with header "ratio,latency_ms,map".
[[nodiscard]] PruningLut read_lut_csv(std::istream& in);
void write_lut_csv(std::ostream& out, const PruningLut& lut);

/// Static description of a detector used by the latency model, the cluster
/// selector and the agents' state vector.
struct ModelProfile {
    std::string name;
    PruningLut lut;
    std::vector<std::uint64_t> layer_footprints_bytes; // weights + output feature map
    double weight_count = 0.0;
    double layer_count = 0.0;
    double mean_channels = 0.0;
    double mean_kernel = 0.0;

    [[nodiscard]] std::uint64_t max_layer_bytes() const;
};

/// Bundled profiles: "yolo_like" (dense 26.1 ms / 70.2 mAP) and "ssd_like"
/// (dense 62.5 ms / 52.9 mAP).
[[nodiscard]] ModelProfile bundled_model(std::string_view name);
[[nodiscard]] bool is_bundled_model(std::string_view name);

/// Loads a LUT by bundled model name or CSV path.
[[nodiscard]] PruningLut resolve_lut(const std::string& name_or_path);

} // namespace edgedeploy
