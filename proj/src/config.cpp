#include "edgedeploy/config.hpp"

#include "edgedeploy/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace edgedeploy {

using nlohmann::json;

namespace {

// Reads the fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& node, std::string where) : node_(node), where_(std::move(where)) {
        if (!node.is_object()) {
            throw ConfigError(where_ + ": expected an object");
        }
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = node_.find(key);
        if (it == node_.end()) {
            return;
        }
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where_ + "." + key + ": wrong type");
        }
    }

    template <typename T>
    void get_optional(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        const auto it = node_.find(key);
        if (it == node_.end()) {
            return;
        }
        if (it->is_null()) {
            out.reset();
            return;
        }
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where_ + "." + key + ": wrong type");
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        const auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& [key, value] : node_.items()) {
            if (seen_.count(key) == 0) {
                throw ConfigError(where_ + ": unknown key '" + key + "'");
            }
        }
    }

private:
    const json& node_;
    std::string where_;
    std::set<std::string> seen_;
};

void read_gen(const json& node, RunConfig& cfg) {
    ObjectReader r(node, "gen");
    r.get("segment_len_frames", cfg.gen.segment_len_frames);
    r.get("decay_slope_per_frame", cfg.gen.decay_slope_per_frame);
    r.get("noise_sigma", cfg.gen.noise_sigma);
    r.get("jump_prob", cfg.gen.jump_prob);
    r.get("jump_depth", cfg.gen.jump_depth);
    r.get("boundary_depth", cfg.gen.boundary_depth);
    r.get("seed", cfg.gen.seed);
    r.get("fps", cfg.fps);
    r.get("duration_ms", cfg.duration_ms);
    r.finish();
}

void read_selector(const json& node, SelectorConfig& s) {
    ObjectReader r(node, "selector");
    std::string mode(to_string(s.mode));
    r.get("mode", mode);
    s.mode = selector_mode_from_string(mode);
    r.get("threshold", s.threshold);
    r.get("band_fraction", s.band_fraction);
    r.get("fit_window", s.fit_window);
    r.get("app_min_response_frames", s.app_min_response_frames);
    r.finish();
}

void read_marl(const json& node, MarlConfig& m) {
    ObjectReader r(node, "marl");
    r.get("hidden", m.hidden);
    r.get("lr", m.lr);
    r.get("lr_final", m.lr_final);
    r.get("discount", m.discount);
    r.get("batch", m.batch);
    r.get("replay_capacity", m.replay_capacity);
    r.get("target_sync_every", m.target_sync_every);
    r.get("eps_start", m.eps_start);
    r.get("eps_end", m.eps_end);
    r.get("eps_decay_fraction", m.eps_decay_fraction);
    r.get("center_rewards", m.center_rewards);
    r.get("warmup_frames", m.warmup_frames);
    r.finish();
}

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace

void RunConfig::validate() const {
    gen.validate();
    selector.validate();
    marl.validate();
    if (!(fps > 0.0) || !(duration_ms > 0.0)) {
        throw ConfigError("fps and duration_ms must be positive");
    }
    if (!(rt_tar_ms > 0.0)) {
        throw ConfigError("rt_tar_ms must be positive");
    }
    if (!(alpha >= 0.0)) {
        throw ConfigError("alpha must be nonnegative");
    }
    if (!(train_noise >= 0.0 && train_noise < 1.0) || !(eval_noise >= 0.0 && eval_noise < 1.0)) {
        throw ConfigError("noise bounds must lie in [0, 1)");
    }
    if (offsets.empty()) {
        throw ConfigError("offsets must not be empty");
    }
    if (seeds.empty()) {
        throw ConfigError("seeds must not be empty");
    }
    if (oracle_cap == 0) {
        throw ConfigError("oracle_cap must be positive");
    }
    if (queue_capacity && *queue_capacity == 0) {
        throw ConfigError("queue_capacity must be positive");
    }
    if (out.empty()) {
        throw ConfigError("out must name a directory");
    }
}

RunConfig parse_run_config(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig cfg;
    ObjectReader r(doc, "config");
    r.get("device", cfg.device);
    r.get("model", cfg.model);
    r.get_optional("lut", cfg.lut);
    r.get_optional("trace", cfg.trace);
    if (const auto* g = r.child("gen")) {
        read_gen(*g, cfg);
    }
    r.get("strategy", cfg.strategy);
    r.get("strategies", cfg.strategies);
    r.get("rt_tar_ms", cfg.rt_tar_ms);
    r.get("alpha", cfg.alpha);
    std::string penalty(to_string(cfg.penalty.mode));
    r.get("penalty", penalty);
    cfg.penalty.mode = penalty_mode_from_string(penalty);
    r.get("hard_penalty", cfg.penalty.hard_value);
    r.get("accuracy_tolerance", cfg.accuracy_tolerance);
    if (const auto* s = r.child("selector")) {
        read_selector(*s, cfg.selector);
    }
    r.get("offsets", cfg.offsets);
    r.get_optional("queue_capacity", cfg.queue_capacity);
    r.get_optional("cluster", cfg.cluster);
    r.get("train_noise", cfg.train_noise);
    r.get("eval_noise", cfg.eval_noise);
    if (const auto* m = r.child("marl")) {
        read_marl(*m, cfg.marl);
    }
    r.get("steps", cfg.steps);
    r.get("seed", cfg.seed);
    r.get("seeds", cfg.seeds);
    r.get("oracle_cap", cfg.oracle_cap);
    r.get("threads", cfg.threads);
    r.get("out", cfg.out);
    r.get_optional("checkpoint", cfg.checkpoint);
    r.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string to_json_string(const RunConfig& c) {
    json doc;
    doc["device"] = c.device;
    doc["model"] = c.model;
    doc["lut"] = optional_json(c.lut);
    doc["trace"] = optional_json(c.trace);
    doc["gen"] = {{"segment_len_frames", c.gen.segment_len_frames},
                  {"decay_slope_per_frame", c.gen.decay_slope_per_frame},
                  {"noise_sigma", c.gen.noise_sigma},
                  {"jump_prob", c.gen.jump_prob},
                  {"jump_depth", c.gen.jump_depth},
                  {"boundary_depth", c.gen.boundary_depth},
                  {"seed", c.gen.seed},
                  {"fps", c.fps},
                  {"duration_ms", c.duration_ms}};
    doc["strategy"] = c.strategy;
    doc["strategies"] = c.strategies;
    doc["rt_tar_ms"] = c.rt_tar_ms;
    doc["alpha"] = c.alpha;
    doc["penalty"] = std::string(to_string(c.penalty.mode));
    doc["hard_penalty"] = c.penalty.hard_value;
    doc["accuracy_tolerance"] = c.accuracy_tolerance;
    doc["selector"] = {{"mode", std::string(to_string(c.selector.mode))},
                       {"threshold", c.selector.threshold},
                       {"band_fraction", c.selector.band_fraction},
                       {"fit_window", c.selector.fit_window},
                       {"app_min_response_frames", c.selector.app_min_response_frames}};
    doc["offsets"] = c.offsets;
    doc["queue_capacity"] = optional_json(c.queue_capacity);
    doc["cluster"] = optional_json(c.cluster);
    doc["train_noise"] = c.train_noise;
    doc["eval_noise"] = c.eval_noise;
    doc["marl"] = {{"hidden", c.marl.hidden},
                   {"lr", c.marl.lr},
                   {"lr_final", c.marl.lr_final},
                   {"discount", c.marl.discount},
                   {"batch", c.marl.batch},
                   {"replay_capacity", c.marl.replay_capacity},
                   {"target_sync_every", c.marl.target_sync_every},
                   {"eps_start", c.marl.eps_start},
                   {"eps_end", c.marl.eps_end},
                   {"eps_decay_fraction", c.marl.eps_decay_fraction},
                   {"center_rewards", c.marl.center_rewards},
                   {"warmup_frames", c.marl.warmup_frames}};
    doc["steps"] = c.steps;
    doc["seed"] = c.seed;
    doc["seeds"] = c.seeds;
    doc["oracle_cap"] = c.oracle_cap;
    doc["threads"] = c.threads;
    doc["out"] = c.out;
    doc["checkpoint"] = optional_json(c.checkpoint);
    return doc.dump(2);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json_string(cfg))));
    return buf;
}

void apply_gen_overrides(RunConfig& cfg, std::string_view overrides) {
    auto number = [](std::string_view key, std::string_view text) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            throw ConfigError("--gen " + std::string(key) + ": not a number '" +
                              std::string(text) + "'");
        }
        return v;
    };
    auto count = [&](std::string_view key, std::string_view text) {
        const double v = number(key, text);
        if (v < 0.0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
            throw ConfigError("--gen " + std::string(key) + ": expected a whole number");
        }
        return static_cast<std::uint64_t>(v);
    };
    cfg.trace.reset();
    while (!overrides.empty()) {
        const auto comma = overrides.find(',');
        const auto item = overrides.substr(0, comma);
        overrides = comma == std::string_view::npos ? std::string_view{} : overrides.substr(comma + 1);
        if (item.empty()) {
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("--gen expects key=value pairs, got '" + std::string(item) + "'");
        }
        const auto key = item.substr(0, eq);
        const auto val = item.substr(eq + 1);
        if (key == "segment_len_frames") {
            cfg.gen.segment_len_frames = count(key, val);
        } else if (key == "decay_slope_per_frame") {
            cfg.gen.decay_slope_per_frame = number(key, val);
        } else if (key == "noise_sigma") {
            cfg.gen.noise_sigma = number(key, val);
        } else if (key == "jump_prob") {
            cfg.gen.jump_prob = number(key, val);
        } else if (key == "jump_depth") {
            cfg.gen.jump_depth = number(key, val);
        } else if (key == "boundary_depth") {
            cfg.gen.boundary_depth = number(key, val);
        } else if (key == "seed") {
            cfg.gen.seed = count(key, val);
        } else if (key == "fps") {
            cfg.fps = number(key, val);
        } else if (key == "duration_ms") {
            cfg.duration_ms = number(key, val);
        } else {
            throw ConfigError("--gen: unknown key '" + std::string(key) + "'");
        }
    }
}

FrameTrace load_or_generate_trace(const RunConfig& cfg) {
    if (!cfg.trace) {
        return generate_trace(cfg.gen, cfg.fps, cfg.duration_ms);
    }
    std::ifstream in(*cfg.trace);
    if (!in) {
        throw ConfigError("cannot open trace '" + *cfg.trace + "'");
    }
    return read_trace_csv(in);
}

Scenario build_scenario(const RunConfig& cfg) {
    cfg.validate();
    auto model = bundled_model(cfg.model);
    if (cfg.lut) {
        model.lut = resolve_lut(*cfg.lut);
    }
    ScenarioOptions opts;
    opts.rt_tar_ms = cfg.rt_tar_ms;
    opts.alpha = cfg.alpha;
    opts.penalty = cfg.penalty;
    opts.accuracy_tolerance = cfg.accuracy_tolerance;
    opts.selector = cfg.selector;
    opts.offsets = cfg.offsets;
    opts.noise.bound = cfg.eval_noise;
    opts.queue_capacity = cfg.queue_capacity;
    opts.cluster_override = cfg.cluster;
    return build_scenario(resolve_device(cfg.device), std::move(model),
                          load_or_generate_trace(cfg), opts);
}

} // namespace edgedeploy
