#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace edgedeploy {

/// Joint deployment decision: CPU cluster and V/F levels, the keyframe
/// offset chosen by the keyframe agent, and the pruning ratio.
struct DeploymentAction {
    std::size_t cluster = 0;
    std::size_t cpu_level = 0;
    std::size_t gpu_level = 0;
    std::size_t keyframe_offset = 1;
    double prune_ratio = 0.0;

    friend bool operator==(const DeploymentAction&, const DeploymentAction&) = default;
};

/// One frame's passage through the simulated detector. Filtered frames carry
/// is_keyframe == false and zero service time.
struct ProcessingRecord {
    std::size_t frame_index = 0;
    double arrival_ms = 0.0;
    double service_start_ms = 0.0;
    double service_ms = 0.0;
    double power_w = 0.0;
    bool is_keyframe = false;
    DeploymentAction action;

    [[nodiscard]] double wait_ms() const { return service_start_ms - arrival_ms; }
};

using Rng = std::mt19937_64;

/// Maps a raw 64-bit draw to [0, 1) using its top 53 bits. Used everywhere a
/// uniform variate is needed so streams are reproducible across standard
/// library implementations.
[[nodiscard]] inline double unit_draw(std::uint64_t raw) {
    return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

[[nodiscard]] inline double unit_draw(Rng& rng) { return unit_draw(rng()); }

[[nodiscard]] inline std::size_t index_draw(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n)) % n;
}

} // namespace edgedeploy
