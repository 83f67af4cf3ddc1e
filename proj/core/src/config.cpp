#include "aptsynth/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aptsynth/error.hpp"

namespace aptsynth {

namespace {

using nlohmann::json;

void allow_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [key, value] : obj.items())
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError("unknown key '" + key + "' in " + std::string(where));
}

template <class T>
void read(const json& obj, const char* key, T& out, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(where) + "." + key + " has the wrong type");
    }
}

Ipv4 parse_ip(const std::string& text, std::string_view where) {
    auto ip = Ipv4::parse(text);
    if (!ip) throw ConfigError("bad IPv4 address '" + text + "' in " + std::string(where));
    return *ip;
}

Ipv4Prefix parse_prefix(const std::string& text, std::string_view where) {
    auto p = Ipv4Prefix::parse(text);
    if (!p) throw ConfigError("bad CIDR prefix '" + text + "' in " + std::string(where));
    return *p;
}

// A list is either inline ["1.2.3.4", ...] or {"file": "path"}.
std::vector<Ipv4> read_address_list(const json& v, std::string_view where) {
    if (v.is_object()) {
        allow_keys(v, where, {"file"});
        return load_address_list(v.at("file").get<std::string>());
    }
    if (!v.is_array()) throw ConfigError(std::string(where) + " must be a list or {\"file\": ...}");
    std::vector<Ipv4> out;
    for (const auto& e : v) out.push_back(parse_ip(e.get<std::string>(), where));
    return out;
}

template <std::size_t N>
void read_array(const json& obj, const char* key, std::array<double, N>& out, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_array() || it->size() != N)
        throw ConfigError(std::string(where) + "." + key + " must be a list of " + std::to_string(N) + " numbers");
    for (std::size_t i = 0; i < N; ++i) out[i] = (*it)[i].get<double>();
}

EpochSeconds read_time(const json& v, std::string_view where) {
    auto t = parse_iso8601(v.get<std::string>());
    if (!t) throw ConfigError(std::string(where) + " must be YYYY-MM-DDTHH:MM:SSZ");
    return *t;
}

void apply_json(const json& j, RunConfig& cfg) {
    allow_keys(j, "config", {"seed", "totals", "environment", "mapping", "noise", "scenarios", "correlation", "output"});
    read(j, "seed", cfg.seed, "config");

    if (auto it = j.find("totals"); it != j.end()) {
        allow_keys(*it, "totals", {"noise_count", "apt_count"});
        read(*it, "noise_count", cfg.noise_count, "totals");
        read(*it, "apt_count", cfg.apt_count, "totals");
    }

    if (auto it = j.find("environment"); it != j.end()) {
        const json& e = *it;
        allow_keys(e, "environment", {"campus_cidr", "external_pool", "ip_blacklist", "tor_exit_nodes", "cnc_pool",
                                      "blacklist_count", "tor_count", "cnc_count"});
        auto& env = cfg.environment;
        if (e.contains("campus_cidr")) env.campus_cidr = parse_prefix(e["campus_cidr"].get<std::string>(), "campus_cidr");
        if (e.contains("external_pool")) {
            env.external_pool.clear();
            for (const auto& p : e["external_pool"]) env.external_pool.push_back(parse_prefix(p.get<std::string>(), "external_pool"));
        }
        if (e.contains("ip_blacklist")) env.ip_blacklist = read_address_list(e["ip_blacklist"], "ip_blacklist");
        if (e.contains("tor_exit_nodes")) env.tor_exit_nodes = read_address_list(e["tor_exit_nodes"], "tor_exit_nodes");
        if (e.contains("cnc_pool")) env.cnc_pool = read_address_list(e["cnc_pool"], "cnc_pool");
        read(e, "blacklist_count", env.blacklist_count, "environment");
        read(e, "tor_count", env.tor_count, "environment");
        read(e, "cnc_count", env.cnc_count, "environment");
    }

    if (auto it = j.find("mapping"); it != j.end()) {
        if (it->is_string())
            cfg.mapping = it->get<std::string>();
        else if (it->is_object())
            cfg.mapping = it->dump();
        else
            throw ConfigError("mapping must be a name, a path or an object");
    }

    if (auto it = j.find("noise"); it != j.end()) {
        const json& n = *it;
        allow_keys(n, "noise", {"type_weights", "hourly_weights", "weekday_weights", "time_range", "retry_bound"});
        if (n.contains("type_weights")) {
            TypeWeights w{};
            for (const auto& [name, value] : n["type_weights"].items()) {
                auto t = try_parse_alert_type(name);
                if (!t) throw ConfigError("unknown alert type '" + name + "' in noise.type_weights");
                w[index_of(*t)] = value.get<double>();
            }
            cfg.noise.type_weights = w;
            cfg.noise_weights_explicit = true;
        }
        read_array(n, "hourly_weights", cfg.noise.hourly_weights, "noise");
        read_array(n, "weekday_weights", cfg.noise.weekday_weights, "noise");
        if (n.contains("time_range")) {
            const json& r = n["time_range"];
            allow_keys(r, "noise.time_range", {"begin", "end"});
            if (r.contains("begin")) cfg.noise.time_range.begin = read_time(r["begin"], "noise.time_range.begin");
            if (r.contains("end")) cfg.noise.time_range.end = read_time(r["end"], "noise.time_range.end");
        }
        read(n, "retry_bound", cfg.noise.retry_bound, "noise");
    }

    if (auto it = j.find("scenarios"); it != j.end()) {
        const json& s = *it;
        allow_keys(s, "scenarios", {"shape_weights", "length_min", "length_max", "length_cap", "host_pool_size",
                                    "gap_min_seconds", "gap_max_fraction", "separation_jitter"});
        auto& c = cfg.campaigns;
        if (s.contains("shape_weights")) {
            ShapeWeights w{};
            for (const auto& [name, value] : s["shape_weights"].items()) {
                StepSet steps;
                try {
                    steps = StepSet::parse(name);
                } catch (const TaxonomyError&) {
                    throw ConfigError("bad shape '" + name + "' in scenarios.shape_weights");
                }
                auto idx = shape_index(steps);
                if (!idx) throw ConfigError("'" + name + "' is not one of the ten scenario shapes");
                w[*idx] = value.get<double>();
            }
            c.shape_weights = w;
        }
        read(s, "length_min", c.length_min, "scenarios");
        read(s, "length_max", c.length_max, "scenarios");
        read(s, "length_cap", c.length_cap, "scenarios");
        read(s, "host_pool_size", c.host_pool_size, "scenarios");
        read(s, "gap_min_seconds", c.gaps.min_gap, "scenarios");
        read(s, "gap_max_fraction", c.gaps.max_gap_fraction, "scenarios");
        read(s, "separation_jitter", c.separation_jitter, "scenarios");
    }

    if (auto it = j.find("correlation"); it != j.end()) {
        const json& c = *it;
        allow_keys(c, "correlation", {"tau", "delta_t_hours", "slide_hours", "k_cap", "k_override", "mode",
                                      "threads", "feature_weights"});
        auto& p = cfg.correlation;
        read(c, "tau", p.tau, "correlation");
        double hours = 0;
        if (c.contains("delta_t_hours")) {
            read(c, "delta_t_hours", hours, "correlation");
            p.delta_t = static_cast<DurationSeconds>(hours * kHour);
        }
        if (c.contains("slide_hours")) {
            read(c, "slide_hours", hours, "correlation");
            p.slide = static_cast<DurationSeconds>(hours * kHour);
        }
        read(c, "k_cap", p.k_cap, "correlation");
        read(c, "k_override", p.k_override, "correlation");
        read(c, "threads", p.threads, "correlation");
        if (c.contains("mode")) {
            auto m = parse_mode(c["mode"].get<std::string>());
            if (!m) throw ConfigError("correlation.mode must be 'strict' or 'extended'");
            p.mode = *m;
        }
        if (c.contains("feature_weights")) {
            const json& w = c["feature_weights"];
            allow_keys(w, "correlation.feature_weights", {"type", "src", "dst", "proto", "severity", "timestamp"});
            read(w, "type", p.weights.type, "feature_weights");
            read(w, "src", p.weights.src, "feature_weights");
            read(w, "dst", p.weights.dst, "feature_weights");
            read(w, "proto", p.weights.proto, "feature_weights");
            read(w, "severity", p.weights.severity, "feature_weights");
            read(w, "timestamp", p.weights.timestamp, "feature_weights");
        }
    }

    if (auto it = j.find("output"); it != j.end()) {
        allow_keys(*it, "output", {"dir"});
        std::string dir;
        read(*it, "dir", dir, "output");
        if (!dir.empty()) cfg.out_dir = dir;
    }
}

}  // namespace

RunConfig config_from_json(std::string_view text, RunConfig base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        apply_json(j, base);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config value has the wrong type: ") + e.what());
    }
    validate(base);
    return base;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["seed"] = cfg.seed;
    j["totals"] = {{"noise_count", cfg.noise_count}, {"apt_count", cfg.apt_count}};
    auto& e = j["environment"];
    e["campus_cidr"] = cfg.environment.campus_cidr.to_string();
    e["external_pool"] = nlohmann::ordered_json::array();
    for (const auto& p : cfg.environment.external_pool) e["external_pool"].push_back(p.to_string());
    auto list = [](const std::vector<Ipv4>& ips) {
        auto a = nlohmann::ordered_json::array();
        for (auto ip : ips) a.push_back(ip.to_string());
        return a;
    };
    if (cfg.environment.ip_blacklist) e["ip_blacklist"] = list(*cfg.environment.ip_blacklist);
    if (cfg.environment.tor_exit_nodes) e["tor_exit_nodes"] = list(*cfg.environment.tor_exit_nodes);
    if (cfg.environment.cnc_pool) e["cnc_pool"] = list(*cfg.environment.cnc_pool);
    e["blacklist_count"] = cfg.environment.blacklist_count;
    e["tor_count"] = cfg.environment.tor_count;
    e["cnc_count"] = cfg.environment.cnc_count;
    if (!cfg.mapping.empty() && cfg.mapping.front() == '{')
        j["mapping"] = nlohmann::ordered_json::parse(cfg.mapping);
    else
        j["mapping"] = cfg.mapping;

    auto& n = j["noise"];
    if (cfg.noise_weights_explicit) {
        for (std::size_t t = 0; t < kAlertTypeCount; ++t)
            n["type_weights"][std::string(alert_type_name(alert_type_at(t)))] = cfg.noise.type_weights[t];
    }
    n["hourly_weights"] = cfg.noise.hourly_weights;
    n["weekday_weights"] = cfg.noise.weekday_weights;
    n["time_range"] = {{"begin", format_iso8601(cfg.noise.time_range.begin)},
                       {"end", format_iso8601(cfg.noise.time_range.end)}};
    n["retry_bound"] = cfg.noise.retry_bound;

    auto& s = j["scenarios"];
    const auto& shapes = enumerate_shapes();
    for (std::size_t i = 0; i < kShapeCount; ++i) s["shape_weights"][shapes[i].name()] = cfg.campaigns.shape_weights[i];
    s["length_min"] = cfg.campaigns.length_min;
    s["length_max"] = cfg.campaigns.length_max;
    s["length_cap"] = cfg.campaigns.length_cap;
    s["host_pool_size"] = cfg.campaigns.host_pool_size;
    s["gap_min_seconds"] = cfg.campaigns.gaps.min_gap;
    s["gap_max_fraction"] = cfg.campaigns.gaps.max_gap_fraction;
    s["separation_jitter"] = cfg.campaigns.separation_jitter;

    const auto& p = cfg.correlation;
    auto& c = j["correlation"];
    c["tau"] = p.tau;
    c["delta_t_hours"] = static_cast<double>(p.delta_t) / kHour;
    c["slide_hours"] = static_cast<double>(p.slide) / kHour;
    c["k_cap"] = p.k_cap;
    c["k_override"] = p.k_override;
    c["mode"] = std::string(mode_name(p.mode));
    c["threads"] = p.threads;
    c["feature_weights"] = {{"type", p.weights.type},         {"src", p.weights.src},
                            {"dst", p.weights.dst},           {"proto", p.weights.proto},
                            {"severity", p.weights.severity}, {"timestamp", p.weights.timestamp}};
    j["output"] = {{"dir", cfg.out_dir.string()}};
    return j.dump(2) + "\n";
}

void validate(const RunConfig& cfg) {
    validate(cfg.correlation);
    validate(cfg.noise);
    validate(cfg.campaigns);
    if (cfg.apt_count == 1) throw ConfigError("apt_count of 1 cannot form a scenario");
    if (cfg.correlation.threads < 1) throw ConfigError("threads must be at least 1");
}

NetworkEnvironment build_environment(const RunConfig& cfg) {
    const auto& e = cfg.environment;
    NetworkEnvironment::Spec spec;
    if (e.ip_blacklist && e.tor_exit_nodes && e.cnc_pool) {
        spec.campus_cidr = e.campus_cidr;
        spec.external_pool = e.external_pool;
    } else {
        spec = NetworkEnvironment::generate(e.campus_cidr, e.external_pool, cfg.seed,
                                            e.ip_blacklist ? 0 : e.blacklist_count,
                                            e.tor_exit_nodes ? 0 : e.tor_count, e.cnc_pool ? 0 : e.cnc_count)
                   .spec();
    }
    if (e.ip_blacklist) spec.ip_blacklist = *e.ip_blacklist;
    if (e.tor_exit_nodes) spec.tor_exit_nodes = *e.tor_exit_nodes;
    if (e.cnc_pool) spec.cnc_pool = *e.cnc_pool;
    return NetworkEnvironment(std::move(spec));
}

StepMapping resolve_mapping(const RunConfig& cfg) {
    if (!cfg.mapping.empty() && cfg.mapping.front() == '{') return StepMapping::from_json_text(cfg.mapping);
    return mapping_by_name_or_path(cfg.mapping);
}

NoiseConfig effective_noise_config(const RunConfig& cfg, const StepMapping& mapping) {
    NoiseConfig n = cfg.noise;
    if (!cfg.noise_weights_explicit && cfg.total() > 0) {
        const double apt_fraction = static_cast<double>(cfg.apt_count) / static_cast<double>(cfg.total());
        n.type_weights = calibrated_noise_weights(reported_type_shares(),
                                                  expected_type_composition(mapping, cfg.campaigns.shape_weights),
                                                  apt_fraction);
    }
    return n;
}

}  // namespace aptsynth
