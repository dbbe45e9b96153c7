#include "edgedeploy/pruner.hpp"

#include "edgedeploy/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace edgedeploy {

namespace {

constexpr double kRatioEps = 1e-12;

// Dense rows anchor to the unpruned detectors; the pruned rows are a
// representative lossless-then-degrading profile. K = 10 entries.
const std::vector<LutEntry> kYoloLut = {
    {0.0, 26.1, 70.2}, {0.1, 24.6, 70.2}, {0.2, 23.0, 70.2}, {0.3, 21.3, 69.8},
    {0.4, 19.5, 69.0}, {0.5, 17.6, 67.5}, {0.6, 15.6, 65.0}, {0.7, 13.5, 61.0},
    {0.8, 11.3, 55.0}, {0.9, 9.0, 45.0},
};

const std::vector<LutEntry> kSsdLut = {
    {0.0, 62.5, 52.9}, {0.1, 57.0, 52.9}, {0.2, 51.5, 52.6}, {0.3, 46.0, 52.0},
    {0.4, 40.5, 51.0}, {0.5, 35.0, 49.6}, {0.6, 30.5, 47.5}, {0.7, 26.0, 44.5},
    {0.8, 22.0, 40.5}, {0.9, 18.5, 36.4},
};

} // namespace

PruningLut::PruningLut(std::vector<LutEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) {
        throw ConfigError("pruning LUT is empty");
    }
    if (entries_.front().ratio != 0.0) {
        throw ConfigError("pruning LUT must start with the dense entry (ratio 0)");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (!(e.ratio >= 0.0 && e.ratio < 1.0)) {
            throw ConfigError("pruning ratio must lie in [0, 1)");
        }
        if (!(e.latency_ms > 0.0)) {
            throw ConfigError("LUT latency must be positive");
        }
        if (i == 0) {
            continue;
        }
        const auto& prev = entries_[i - 1];
        if (e.ratio <= prev.ratio) {
            throw ConfigError("LUT ratios must be strictly increasing");
        }
        if (e.latency_ms > prev.latency_ms) {
            throw ConfigError("LUT latency must be nonincreasing in ratio");
        }
        if (e.map_points > prev.map_points) {
            throw ConfigError("LUT mAP must be nonincreasing in ratio");
        }
    }
}

template <typename Field>
double PruningLut::interpolate(double ratio, Field field) const {
    if (ratio < entries_.front().ratio - kRatioEps || ratio > entries_.back().ratio + kRatioEps) {
        throw ConfigError("pruning ratio outside the LUT range");
    }
    const auto hi = std::lower_bound(entries_.begin(), entries_.end(), ratio - kRatioEps,
                                     [](const LutEntry& e, double r) { return e.ratio < r; });
    if (hi == entries_.end()) {
        return field(entries_.back());
    }
    if (std::abs(hi->ratio - ratio) <= kRatioEps || hi == entries_.begin()) {
        return field(*hi);
    }
    const auto lo = hi - 1;
    const double t = (ratio - lo->ratio) / (hi->ratio - lo->ratio);
    return field(*lo) + t * (field(*hi) - field(*lo));
}

double PruningLut::latency_at(double ratio) const {
    return interpolate(ratio, [](const LutEntry& e) { return e.latency_ms; });
}

double PruningLut::map_at(double ratio) const {
    return interpolate(ratio, [](const LutEntry& e) { return e.map_points; });
}

std::vector<double> PruningLut::ratios() const {
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) {
        out.push_back(e.ratio);
    }
    return out;
}

PruneBounds compute_bounds(const PruningLut& lut, double accuracy_tolerance) {
    if (accuracy_tolerance < 0.0) {
        throw ConfigError("accuracy tolerance must be nonnegative");
    }
    const double dense = lut.dense_map();
    PruneBounds b;
    for (const auto& e : lut.entries()) {
        if (e.map_points >= dense) {
            b.lower = e.ratio;
        }
        if (e.map_points >= dense - accuracy_tolerance) {
            b.upper = e.ratio;
        }
    }
    return b;
}

double reconfigure(double /*current_ratio*/, double target_ratio, const PruneBounds& bounds) {
    return std::clamp(target_ratio, bounds.lower, bounds.upper);
}

std::vector<double> ratios_within(const PruningLut& lut, const PruneBounds& bounds) {
    std::vector<double> out;
    for (const auto& e : lut.entries()) {
        if (bounds.contains(e.ratio)) {
            out.push_back(e.ratio);
        }
    }
    return out;
}

PruningLut read_lut_csv(std::istream& in) {
    std::string line;
    bool header = false;
    std::vector<LutEntry> entries;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!header) {
            if (line != "ratio,latency_ms,map") {
                throw ConfigError("LUT header must be 'ratio,latency_ms,map'");
            }
            header = true;
            continue;
        }
        std::stringstream ss(line);
        LutEntry e;
        char c1 = 0;
        char c2 = 0;
        if (!(ss >> e.ratio >> c1 >> e.latency_ms >> c2 >> e.map_points) || c1 != ',' || c2 != ',') {
            throw ConfigError("LUT line " + std::to_string(line_no) + " is malformed");
        }
        entries.push_back(e);
    }
    if (!header) {
        throw ConfigError("LUT file is empty");
    }
    return PruningLut(std::move(entries));
}

void write_lut_csv(std::ostream& out, const PruningLut& lut) {
    out << "ratio,latency_ms,map\n";
    char buf[96];
    for (const auto& e : lut.entries()) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", e.ratio, e.latency_ms, e.map_points);
        out << buf;
    }
}

std::uint64_t ModelProfile::max_layer_bytes() const {
    if (layer_footprints_bytes.empty()) {
        return 0;
    }
    return *std::max_element(layer_footprints_bytes.begin(), layer_footprints_bytes.end());
}

bool is_bundled_model(std::string_view name) { return name == "yolo_like" || name == "ssd_like"; }

ModelProfile bundled_model(std::string_view name) {
    ModelProfile m;
    m.name = std::string(name);
    if (name == "yolo_like") {
        m.lut = PruningLut(kYoloLut);
        // Largest layer (448 KiB) fits the little cluster's L2.
        m.layer_footprints_bytes = {65536, 131072, 262144, 458752, 393216, 196608};
        m.weight_count = 7.2e6;
        m.layer_count = 213;
        m.mean_channels = 256;
        m.mean_kernel = 3;
    } else if (name == "ssd_like") {
        m.lut = PruningLut(kSsdLut);
        m.layer_footprints_bytes = {262144, 786432, 1572864, 1048576, 524288};
        m.weight_count = 26.3e6;
        m.layer_count = 94;
        m.mean_channels = 512;
        m.mean_kernel = 3;
    } else {
        throw ConfigError("unknown bundled model '" + std::string(name) +
                          "' (available: yolo_like, ssd_like)");
    }
    return m;
}

PruningLut resolve_lut(const std::string& name_or_path) {
    if (is_bundled_model(name_or_path)) {
        return bundled_model(name_or_path).lut;
    }
    std::ifstream in(name_or_path);
    if (!in) {
        throw ConfigError("cannot open LUT '" + name_or_path + "'");
    }
    return read_lut_csv(in);
}

} // namespace edgedeploy
