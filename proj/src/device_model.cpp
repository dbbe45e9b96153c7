#include "edgedeploy/device_model.hpp"

#include "edgedeploy/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace edgedeploy {

namespace {

using nlohmann::json;

// Frequencies from the OnePlus 8T DVFS tables (kHz). Cache sizes, idle power
// and power coefficients are calibration choices: the vendor does not publish
// them, and the coefficients are tuned so that running a workload on the
// little cluster draws roughly 60% less inference power than the big cluster
// at comparable frequency.
constexpr std::string_view kOnePlus8T = R"({
  "name": "oneplus8t",
  // calibration: platform power with CPU/GPU at minimum frequency
  "idle_power_w": 0.3,
  "gpu": {
    "levels_khz": [305000, 400000, 441600, 490000, 525000, 587000],
    // calibration
    "power_coeff": 1.2
  },
  "clusters": [
    {
      "name": "little",
      "cores": 4,
      // calibration: total L2 of the cluster
      "l2_cache_bytes": 524288,
      "power_coeff": 0.08,
      "levels_khz": [690000, 780000, 880000, 970000, 1080000, 1170000, 1250000,
                     1340000, 1420000, 1520000, 1610000, 1710000, 1800000]
    },
    {
      "name": "medium",
      "cores": 3,
      "l2_cache_bytes": 1048576,
      "power_coeff": 0.15,
      "levels_khz": [710000, 830000, 940000, 1060000, 1170000, 1290000, 1380000,
                     1480000, 1570000, 1670000, 1770000, 1860000, 1960000, 2050000,
                     2150000, 2250000, 2340000, 2420000]
    },
    {
      "name": "big",
      "cores": 1,
      "l2_cache_bytes": 2097152,
      "power_coeff": 0.238,
      "levels_khz": [840000, 960000, 1080000, 1190000, 1310000, 1400000, 1520000,
                     1630000, 1750000, 1860000, 1980000, 2070000, 2170000, 2270000,
                     2360000, 2460000, 2550000, 2650000, 2750000, 2840000]
    }
  ]
})";

void check_levels(const std::vector<VfLevel>& levels, const std::string& owner) {
    if (levels.empty()) {
        throw ConfigError(owner + ": level list is empty");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i].khz == 0) {
            throw ConfigError(owner + ": frequency must be positive");
        }
        if (levels[i].index != i) {
            throw ConfigError(owner + ": level indices must be 0..n-1");
        }
        if (i > 0 && levels[i].khz <= levels[i - 1].khz) {
            throw ConfigError(owner + ": levels must be strictly ascending");
        }
    }
}

std::vector<VfLevel> levels_from_json(const json& node, const std::string& owner) {
    if (!node.is_array()) {
        throw ConfigError(owner + ": levels_khz must be an array");
    }
    std::vector<std::uint32_t> khz;
    for (const auto& v : node) {
        if (!v.is_number()) {
            throw ConfigError(owner + ": frequency entries must be numbers");
        }
        const double f = v.get<double>();
        if (f <= 0.0) {
            throw ConfigError(owner + ": frequency must be positive");
        }
        khz.push_back(static_cast<std::uint32_t>(f));
    }
    auto levels = make_levels(khz);
    check_levels(levels, owner);
    return levels;
}

json levels_to_json(const std::vector<VfLevel>& levels) {
    json arr = json::array();
    for (const auto& l : levels) {
        arr.push_back(l.khz);
    }
    return arr;
}

double ghz_cubed(const VfLevel& level) {
    const double f = level.ghz();
    return f * f * f;
}

} // namespace

std::vector<VfLevel> make_levels(const std::vector<std::uint32_t>& khz) {
    std::vector<VfLevel> out;
    out.reserve(khz.size());
    for (std::size_t i = 0; i < khz.size(); ++i) {
        out.push_back(VfLevel{khz[i], i});
    }
    return out;
}

void DeviceSpec::validate() const {
    if (clusters.empty()) {
        throw ConfigError("device '" + name + "': at least one CPU cluster is required");
    }
    for (const auto& c : clusters) {
        check_levels(c.levels, "cluster '" + c.name + "'");
        if (c.l2_cache_bytes == 0) {
            throw ConfigError("cluster '" + c.name + "': l2_cache_bytes must be positive");
        }
        if (c.core_count < 1) {
            throw ConfigError("cluster '" + c.name + "': core_count must be >= 1");
        }
        if (c.power_coeff < 0.0) {
            throw ConfigError("cluster '" + c.name + "': power_coeff must be nonnegative");
        }
    }
    check_levels(gpu_levels, "gpu");
    if (gpu_power_coeff < 0.0) {
        throw ConfigError("gpu power_coeff must be nonnegative");
    }
    if (idle_power < 0.0) {
        throw ConfigError("idle_power_w must be nonnegative");
    }
}

std::size_t DeviceSpec::total_cpu_levels() const {
    std::size_t n = 0;
    for (const auto& c : clusters) {
        n += c.levels.size();
    }
    return n;
}

std::size_t DeviceSpec::performance_cluster() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < clusters.size(); ++i) {
        if (clusters[i].max_level().khz > clusters[best].max_level().khz) {
            best = i;
        }
    }
    return best;
}

DeviceSpec load_device_spec(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("device spec parse failure: ") + e.what());
    }
    DeviceSpec spec;
    try {
        spec.name = doc.value("name", std::string("custom"));
        spec.idle_power = doc.at("idle_power_w").get<double>();
        const auto& gpu = doc.at("gpu");
        spec.gpu_levels = levels_from_json(gpu.at("levels_khz"), "gpu");
        spec.gpu_power_coeff = gpu.at("power_coeff").get<double>();
        for (const auto& node : doc.at("clusters")) {
            CpuCluster c;
            c.name = node.at("name").get<std::string>();
            c.core_count = node.value("cores", 1);
            const double cache = node.at("l2_cache_bytes").get<double>();
            if (cache <= 0.0) {
                throw ConfigError("cluster '" + c.name + "': l2_cache_bytes must be positive");
            }
            c.l2_cache_bytes = static_cast<std::uint64_t>(cache);
            c.power_coeff = node.at("power_coeff").get<double>();
            c.levels = levels_from_json(node.at("levels_khz"), "cluster '" + c.name + "'");
            spec.clusters.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("device spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

DeviceSpec load_device_spec_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open device spec '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return load_device_spec(ss.str());
}

std::string serialize_device_spec(const DeviceSpec& spec) {
    json doc;
    doc["name"] = spec.name;
    doc["idle_power_w"] = spec.idle_power;
    doc["gpu"] = {{"levels_khz", levels_to_json(spec.gpu_levels)},
                  {"power_coeff", spec.gpu_power_coeff}};
    json clusters = json::array();
    for (const auto& c : spec.clusters) {
        clusters.push_back({{"name", c.name},
                            {"cores", c.core_count},
                            {"l2_cache_bytes", c.l2_cache_bytes},
                            {"power_coeff", c.power_coeff},
                            {"levels_khz", levels_to_json(c.levels)}});
    }
    doc["clusters"] = std::move(clusters);
    return doc.dump(2);
}

std::string_view bundled_device_document(std::string_view name) {
    if (name == "oneplus8t") {
        return kOnePlus8T;
    }
    throw ConfigError("unknown bundled device '" + std::string(name) + "' (available: oneplus8t)");
}

DeviceSpec bundled_device(std::string_view name) {
    return load_device_spec(bundled_device_document(name));
}

DeviceSpec resolve_device(const std::string& name_or_path) {
    if (name_or_path == "oneplus8t") {
        return bundled_device(name_or_path);
    }
    return load_device_spec_file(name_or_path);
}

void check_state(const DeviceSpec& spec, const PlatformState& state) {
    if (state.active_cluster >= spec.clusters.size()) {
        throw ConfigError("platform state: cluster index out of range");
    }
    if (state.cpu_level >= spec.clusters[state.active_cluster].levels.size()) {
        throw ConfigError("platform state: cpu level out of range");
    }
    if (state.gpu_level >= spec.gpu_levels.size()) {
        throw ConfigError("platform state: gpu level out of range");
    }
}

double inference_power(const DeviceSpec& spec, const PlatformState& state, double busy_fraction) {
    check_state(spec, state);
    if (!(busy_fraction >= 0.0 && busy_fraction <= 1.0)) {
        throw ConfigError("busy_fraction must lie in [0, 1]");
    }
    const auto& cluster = spec.clusters[state.active_cluster];
    const double dynamic = cluster.power_coeff * ghz_cubed(cluster.levels[state.cpu_level]) +
                           spec.gpu_power_coeff * ghz_cubed(spec.gpu_levels[state.gpu_level]);
    return busy_fraction * dynamic;
}

double power_draw(const DeviceSpec& spec, const PlatformState& state, double busy_fraction) {
    return spec.idle_power + inference_power(spec, state, busy_fraction);
}

} // namespace edgedeploy
