#pragma once

#include "edgedeploy/device_model.hpp"

#include <cstddef>
#include <cstdint>

namespace edgedeploy {

/// Picks the CPU cluster for DNN-support work before any DVFS search: the
/// cheapest (lowest power coefficient) cluster whose L2 holds the largest
/// layer, or the largest-cache cluster when none does.
[[nodiscard]] std::size_t select_cluster(const DeviceSpec& spec, std::uint64_t max_layer_bytes);

} // namespace edgedeploy
