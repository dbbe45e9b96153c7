#pragma once

#include <string_view>

namespace edgedeploy {

enum class PenaltyMode { soft, hard };

[[nodiscard]] std::string_view to_string(PenaltyMode mode);
[[nodiscard]] PenaltyMode penalty_mode_from_string(std::string_view name);

struct PenaltyConfig {
    PenaltyMode mode = PenaltyMode::soft;
    double hard_value = 1.0; // subtracted on any deadline miss in hard mode
};

/// Shared reward of all agents:
///   acc - alpha * po                 if l_pred <= rt_tar
///   acc - alpha * po - SP            otherwise
/// with SP = (l_pred - rt_tar) / rt_tar (soft) or hard_value (hard).
[[nodiscard]] double compute_reward(double acc_n, double po_n, double l_pred_ms, double rt_tar_ms,
                                    double alpha, const PenaltyConfig& penalty);

} // namespace edgedeploy
