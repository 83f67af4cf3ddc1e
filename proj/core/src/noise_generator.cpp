#include "aptsynth/noise_generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "aptsynth/alert_rules.hpp"
#include "aptsynth/error.hpp"
#include "aptsynth/parallel.hpp"

namespace aptsynth {

namespace {

void check_weights(std::span<const double> w, std::string_view what) {
    double sum = 0.0;
    for (double v : w) {
        if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string(what) + " must be finite and non-negative");
        sum += v;
    }
    if (sum <= 0.0) throw ConfigError(std::string(what) + " sum to zero");
}

struct KeyHash {
    std::size_t operator()(const std::tuple<AlertType, Ipv4, Ipv4>& k) const noexcept {
        const auto& [t, s, d] = k;
        return static_cast<std::size_t>(
            mix64((std::uint64_t{s.value} << 32 | d.value) ^ (std::uint64_t(index_of(t)) << 58)));
    }
};

bool earlier(const Alert& a, const Alert& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.alert_id < b.alert_id;
}

}  // namespace

TypeWeights reported_type_shares() {
    TypeWeights w{};
    const std::pair<AlertType, double> named[] = {
        {AlertType::scan_alert, 0.129},
        {AlertType::tor_alert, 0.106},
        {AlertType::data_exfiltration_alert, 0.077},
        {AlertType::kernel_exploit_attempt_alert, 0.076},
        {AlertType::network_intrusion_alert, 0.075},
    };
    double used = 0.0;
    for (auto [t, share] : named) {
        w[index_of(t)] = share;
        used += share;
    }
    const double rest = (1.0 - used) / static_cast<double>(kAlertTypeCount - std::size(named));
    for (auto& v : w)
        if (v == 0.0) v = rest;
    return w;
}

TypeWeights calibrated_noise_weights(const TypeWeights& targets, const TypeWeights& apt_composition,
                                     double apt_fraction) {
    if (!(apt_fraction >= 0.0 && apt_fraction <= 1.0)) throw ConfigError("APT fraction must lie in [0, 1]");
    if (apt_fraction >= 1.0) return targets;
    TypeWeights w{};
    double sum = 0.0;
    for (std::size_t t = 0; t < kAlertTypeCount; ++t) {
        w[t] = std::max(0.0, (targets[t] - apt_fraction * apt_composition[t]) / (1.0 - apt_fraction));
        sum += w[t];
    }
    if (sum <= 0.0) throw ConfigError("calibrated noise weights are all zero");
    for (auto& v : w) v /= sum;
    return w;
}

std::array<double, 24> default_hourly_profile() {
    std::array<double, 24> h{};
    for (int i = 0; i < 24; ++i) h[static_cast<std::size_t>(i)] = 1.0 - 0.5 * i / 23.0;
    return h;
}

void validate(const NoiseConfig& cfg) {
    check_weights(cfg.type_weights, "noise type weights");
    check_weights(cfg.hourly_weights, "hourly weights");
    check_weights(cfg.weekday_weights, "weekday weights");
    if (cfg.time_range.end < cfg.time_range.begin) throw ConfigError("time range is empty");
    if (cfg.retry_bound < 1) throw ConfigError("retry bound must be at least 1");
}

EpochSeconds sample_noise_timestamp(const NoiseConfig& cfg, Rng& rng) {
    const EpochSeconds first_day = floor_to_day(cfg.time_range.begin);
    const EpochSeconds last_day = floor_to_day(cfg.time_range.end);
    const double max_weekday = *std::max_element(cfg.weekday_weights.begin(), cfg.weekday_weights.end());
    for (;;) {
        const EpochSeconds day = first_day + uniform_int<EpochSeconds>(rng, 0, (last_day - first_day) / kDay) * kDay;
        if (uniform_real(rng, 0.0, max_weekday) >= cfg.weekday_weights[static_cast<std::size_t>(day_of_week(day))])
            continue;
        const auto hour = static_cast<EpochSeconds>(weighted_index(rng, cfg.hourly_weights));
        const EpochSeconds t = day + hour * kHour + uniform_int<EpochSeconds>(rng, 0, kHour - 1);
        if (cfg.time_range.contains(t)) return t;
    }
}

Alert generate_noise_alert(AlertType forced, const NetworkEnvironment& env, const StepMapping& mapping,
                           const NoiseConfig& cfg, Rng& rng) {
    Alert a;
    a.alert_type = forced;
    a.timestamp = sample_noise_timestamp(cfg, rng);
    a.step = mapping.step_of(forced);
    a.ground_truth = GroundTruth::noise();
    assign_network_attributes(a, env.sample(AddressClass::campus, rng), env, rng);
    return a;
}

Alert generate_noise_alert(const NetworkEnvironment& env, const StepMapping& mapping, const NoiseConfig& cfg,
                           Rng& rng) {
    const auto type = alert_type_at(weighted_index(rng, cfg.type_weights));
    return generate_noise_alert(type, env, mapping, cfg, rng);
}

NoiseBatchStats reroll_noise(std::vector<Alert>& batch, std::span<const Alert> reserved,
                             const NetworkEnvironment& env, const StepMapping& mapping, const NoiseConfig& cfg,
                             const CorrelationParams& params, std::uint64_t seed) {
    validate(cfg);
    validate(params);
    NoiseBatchStats stats;

    std::unordered_map<Ipv4, std::vector<EpochSeconds>> reserved_times;
    std::unordered_set<std::uint64_t> reserved_ids;
    for (const Alert& a : reserved) {
        reserved_times[a.src_ip].push_back(a.timestamp);
        reserved_ids.insert(a.alert_id);
    }
    for (auto& [host, times] : reserved_times) std::sort(times.begin(), times.end());

    auto near_reserved = [&](const Alert& a) {
        auto it = reserved_times.find(a.src_ip);
        if (it == reserved_times.end()) return false;
        auto pos = std::lower_bound(it->second.begin(), it->second.end(), a.timestamp - params.delta_t);
        return pos != it->second.end() && *pos <= a.timestamp + params.delta_t;
    };

    std::vector<Alert> combined;
    for (int round = 0; round <= cfg.retry_bound; ++round) {
        stats.rounds = static_cast<std::size_t>(round) + 1;
        std::vector<std::size_t> flagged;

        for (std::size_t i = 0; i < batch.size(); ++i)
            if (near_reserved(batch[i])) flagged.push_back(i);
        stats.reserved_rerolled += flagged.size();

        std::vector<std::size_t> order(batch.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto x, auto y) { return earlier(batch[x], batch[y]); });
        std::unordered_map<std::tuple<AlertType, Ipv4, Ipv4>, EpochSeconds, KeyHash> last_seen;
        for (auto i : order) {
            const Alert& a = batch[i];
            auto [it, fresh] = last_seen.try_emplace({a.alert_type, a.src_ip, a.dest_ip}, a.timestamp);
            if (!fresh) {
                if (a.timestamp - it->second <= params.delta_t) {
                    flagged.push_back(i);
                    ++stats.duplicates_rerolled;
                }
                it->second = a.timestamp;
            }
        }

        std::string where;
        if (flagged.empty()) {
            combined.assign(batch.begin(), batch.end());
            combined.insert(combined.end(), reserved.begin(), reserved.end());
            const auto result = correlate(combined, params, mapping);
            const AlertIndex index(batch);
            for (std::size_t c = 0; c < result.clusters.size(); ++c) {
                const auto& ids = result.clusters[c].alert_ids;
                const bool touches_reserved =
                    std::any_of(ids.begin(), ids.end(), [&](auto id) { return reserved_ids.contains(id); });
                if (result.results[c].corr_final == 0 && !touches_reserved) continue;
                for (auto id : ids) {
                    if (reserved_ids.contains(id)) continue;
                    const Alert& a = index.at(id);
                    flagged.push_back(static_cast<std::size_t>(&a - batch.data()));
                    if (where.empty()) where = format_iso8601(a.timestamp);
                }
            }
            stats.correlated_rerolled += flagged.size();
            if (flagged.empty()) return stats;
        }
        if (round == cfg.retry_bound) {
            if (where.empty()) where = format_iso8601(batch[flagged.front()].timestamp);
            throw GenerationError("noise rejection did not converge after " + std::to_string(cfg.retry_bound) +
                                  " rounds; " + std::to_string(flagged.size()) +
                                  " alerts still collide, first in the window around " + where);
        }

        std::sort(flagged.begin(), flagged.end());
        flagged.erase(std::unique(flagged.begin(), flagged.end()), flagged.end());
        for (auto i : flagged) {
            Alert& a = batch[i];
            Rng rng = make_stream(seed, StreamTag::noise_reroll, a.alert_id, static_cast<std::uint64_t>(round) + 1);
            Alert fresh = generate_noise_alert(a.alert_type, env, mapping, cfg, rng);
            fresh.alert_id = a.alert_id;
            a = std::move(fresh);
        }
    }
    return stats;
}

std::vector<Alert> generate_noise_batch(std::size_t n, const NetworkEnvironment& env, const StepMapping& mapping,
                                        const NoiseConfig& cfg, const CorrelationParams& params, std::uint64_t seed,
                                        std::uint64_t first_id, std::span<const Alert> reserved,
                                        NoiseBatchStats* stats) {
    validate(cfg);
    std::vector<Alert> batch(n);
    parallel_for(n, params.threads, [&](std::size_t i) {
        Rng rng = make_stream(seed, StreamTag::noise_segment, i);
        batch[i] = generate_noise_alert(env, mapping, cfg, rng);
        batch[i].alert_id = first_id + i;
    });
    if (n == 0) return batch;
    auto s = reroll_noise(batch, reserved, env, mapping, cfg, params, seed);
    if (stats) *stats = s;
    return batch;
}

}  // namespace aptsynth
