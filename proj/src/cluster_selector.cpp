#include "edgedeploy/cluster_selector.hpp"

#include "edgedeploy/error.hpp"

#include <optional>

namespace edgedeploy {

std::size_t select_cluster(const DeviceSpec& spec, std::uint64_t max_layer_bytes) {
    if (spec.clusters.empty()) {
        throw ConfigError("select_cluster: device has no clusters");
    }
    if (max_layer_bytes == 0) {
        throw ConfigError("select_cluster: layer footprint must be positive");
    }
    std::optional<std::size_t> cheapest;
    std::size_t largest = 0;
    for (std::size_t i = 0; i < spec.clusters.size(); ++i) {
        const auto& c = spec.clusters[i];
        if (c.l2_cache_bytes > spec.clusters[largest].l2_cache_bytes) {
            largest = i;
        }
        if (c.l2_cache_bytes < max_layer_bytes) {
            continue;
        }
        // Ties on coefficient go to the smaller cache.
        if (!cheapest || c.power_coeff < spec.clusters[*cheapest].power_coeff ||
            (c.power_coeff == spec.clusters[*cheapest].power_coeff &&
             c.l2_cache_bytes < spec.clusters[*cheapest].l2_cache_bytes)) {
            cheapest = i;
        }
    }
    return cheapest.value_or(largest);
}

} // namespace edgedeploy
