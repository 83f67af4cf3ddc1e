#include "aptsynth/scenario_generator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "aptsynth/alert_rules.hpp"
#include "aptsynth/error.hpp"

namespace aptsynth {

namespace {

ShapeKind kind_for_size(int n) {
    switch (n) {
        case 5: return ShapeKind::full;
        case 4: return ShapeKind::four_step;
        case 3: return ShapeKind::three_step;
        default: return ShapeKind::two_step;
    }
}

// Prefix of a chain keeps the first `n` steps of the shape in lifecycle order.
ScenarioShape prefix_of(const ScenarioShape& s, int n) {
    StepSet steps;
    const auto ordered = s.ordered_steps();
    for (int i = 0; i < n; ++i) steps.insert(ordered[static_cast<std::size_t>(i)]);
    return ScenarioShape::of(steps);
}

}  // namespace

std::string_view shape_kind_name(ShapeKind k) {
    switch (k) {
        case ShapeKind::full: return "full";
        case ShapeKind::four_step: return "four_step";
        case ShapeKind::three_step: return "three_step";
        case ShapeKind::two_step: return "two_step";
    }
    return {};
}

ScenarioShape ScenarioShape::of(StepSet steps) {
    if (steps.size() < 1) throw ConfigError("scenario shape has no steps");
    return {steps, kind_for_size(steps.size())};
}

std::vector<AptStep> ScenarioShape::ordered_steps() const {
    std::vector<AptStep> out;
    for (auto s : kAllSteps)
        if (steps.contains(s)) out.push_back(s);
    return out;
}

const std::array<ScenarioShape, kShapeCount>& enumerate_shapes() {
    using enum AptStep;
    static const std::array<ScenarioShape, kShapeCount> shapes{
        ScenarioShape::of({A, B, C, D, E}), ScenarioShape::of({A, B, C, D}), ScenarioShape::of({B, C, D, E}),
        ScenarioShape::of({A, B, C}),       ScenarioShape::of({B, C, D}),    ScenarioShape::of({A, B, E}),
        ScenarioShape::of({A, B}),          ScenarioShape::of({B, C}),       ScenarioShape::of({C, D}),
        ScenarioShape::of({D, E}),
    };
    return shapes;
}

std::optional<std::size_t> shape_index(StepSet steps) {
    const auto& shapes = enumerate_shapes();
    for (std::size_t i = 0; i < shapes.size(); ++i)
        if (shapes[i].steps == steps) return i;
    return std::nullopt;
}

ShapeWeights default_shape_weights() {
    return {0.4, 0.1, 0.1, 0.2 / 3, 0.2 / 3, 0.2 / 3, 0.05, 0.05, 0.05, 0.05};
}

std::vector<Alert> generate_scenario(const ScenarioRequest& request, const StepMapping& mapping,
                                     const NetworkEnvironment& env, DurationSeconds delta_t, Rng& rng,
                                     const GapLaw& gaps) {
    const auto steps = request.shape.ordered_steps();
    for (auto s : steps)
        if (mapping.types_of(s).empty())
            throw ConfigError(std::string("mapping '") + mapping.name() + "' has no alert type for step " +
                              step_letter(s));
    const double max_gap = gaps.max_gap_fraction * static_cast<double>(delta_t);
    if (gaps.min_gap < 1 || max_gap < static_cast<double>(gaps.min_gap))
        throw ConfigError("gap law bounds are inconsistent with delta_t");

    const Ipv4 host = request.host ? *request.host : env.sample(AddressClass::campus, rng);
    std::vector<Alert> out;
    out.reserve(steps.size());
    EpochSeconds t = request.start;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i > 0)
            t += std::max<DurationSeconds>(
                1, static_cast<DurationSeconds>(std::llround(log_uniform(rng, double(gaps.min_gap), max_gap))));
        const auto& types = mapping.types_of(steps[i]);
        Alert a;
        a.alert_type = types[uniform_int<std::size_t>(rng, 0, types.size() - 1)];
        a.timestamp = t;
        a.step = steps[i];
        a.campaign_id = request.campaign_id;
        a.ground_truth = GroundTruth::scenario(request.scenario_id, request.shape.steps, static_cast<int>(i));
        assign_network_attributes(a, host, env, rng);
        out.push_back(std::move(a));
    }
    return out;
}

std::array<double, kAlertTypeCount> expected_type_composition(const StepMapping& mapping,
                                                              const ShapeWeights& weights) {
    std::array<double, kStepCount> per_step{};
    double total = 0.0;
    const auto& shapes = enumerate_shapes();
    for (std::size_t i = 0; i < shapes.size(); ++i)
        for (auto s : shapes[i].ordered_steps()) {
            per_step[index_of(s)] += weights[i];
            total += weights[i];
        }
    std::array<double, kAlertTypeCount> out{};
    if (total <= 0.0) return out;
    for (auto s : kAllSteps) {
        const auto& types = mapping.types_of(s);
        for (auto t : types) out[index_of(t)] = per_step[index_of(s)] / total / static_cast<double>(types.size());
    }
    return out;
}

void validate(const CampaignConfig& cfg) {
    if (cfg.length_cap < 2) throw ConfigError("campaign length cap must be at least 2");
    if (cfg.length_min < 2 || cfg.length_min > cfg.length_max || cfg.length_max > cfg.length_cap)
        throw ConfigError("campaign length bounds must satisfy 2 <= min <= max <= cap");
    if (cfg.host_pool_size < 1) throw ConfigError("campaign host pool must hold at least one host");
    if (cfg.separation_jitter < 0.0) throw ConfigError("separation jitter must be non-negative");
    double sum = 0.0;
    for (double w : cfg.shape_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("shape weights must be finite and non-negative");
        sum += w;
    }
    if (sum <= 0.0) throw ConfigError("shape weights sum to zero");
}

int draw_campaign_length(const CampaignConfig& cfg, Rng& rng) {
    return uniform_int<int>(rng, cfg.length_min, cfg.length_max);
}

Campaign generate_campaign(const CampaignRequest& request, const CampaignConfig& cfg, const NetworkEnvironment& env,
                           const StepMapping& mapping, DurationSeconds delta_t, TimeRange range, Rng& rng) {
    if (request.host_pool.empty()) throw ConfigError("campaign host pool is empty");
    if (request.exact && (request.target_length < 2 || request.target_length > request.cap))
        throw ConfigError("exact campaign length must lie in [2, cap]");

    Campaign c;
    c.campaign_id = request.campaign_id;
    c.host_pool = request.host_pool;

    const auto& shapes = enumerate_shapes();
    const auto jitter_max = static_cast<DurationSeconds>(cfg.separation_jitter * static_cast<double>(delta_t));
    int count = 0;
    EpochSeconds next_start = 0;  // relative to the campaign start
    std::uint64_t scenario_id = request.first_scenario_id;

    while (count < request.target_length) {
        const int room = request.cap - count;
        if (room < 2) break;
        ScenarioShape shape = request.forced_shape ? *request.forced_shape
                                                   : shapes[weighted_index(rng, cfg.shape_weights)];
        // An exact campaign must never be left one alert short.
        if (request.exact && !request.forced_shape) {
            const int need = request.target_length - count;
            while (need - shape.steps.size() == 1) shape = shapes[weighted_index(rng, cfg.shape_weights)];
        }
        const int limit = request.exact ? request.target_length - count : room;
        if (shape.steps.size() > limit) shape = prefix_of(shape, limit);

        ScenarioRequest sr;
        sr.shape = shape;
        sr.start = next_start;
        sr.host = request.host_pool[uniform_int<std::size_t>(rng, 0, request.host_pool.size() - 1)];
        sr.scenario_id = scenario_id++;
        sr.campaign_id = request.campaign_id;
        auto alerts = generate_scenario(sr, mapping, env, delta_t, rng, cfg.gaps);

        c.scenarios.push_back({sr.scenario_id, shape, *sr.host, c.alerts.size(), alerts.size()});
        count += static_cast<int>(alerts.size());
        next_start = alerts.back().timestamp + delta_t + 1 + uniform_int<DurationSeconds>(rng, 0, jitter_max);
        c.alerts.insert(c.alerts.end(), alerts.begin(), alerts.end());
    }
    if (c.alerts.empty()) return c;

    const DurationSeconds duration = c.alerts.back().timestamp;
    if (duration > range.length())
        throw GenerationError("campaign " + request.campaign_id + " spans " + std::to_string(duration / kDay) +
                              " days and does not fit the time range");
    c.start = uniform_int<EpochSeconds>(rng, range.begin, range.end - duration);
    for (auto& a : c.alerts) a.timestamp += c.start;
    return c;
}

std::vector<Campaign> plan_campaigns(std::size_t total_alerts, const CampaignConfig& cfg,
                                     const NetworkEnvironment& env, const StepMapping& mapping,
                                     DurationSeconds delta_t, TimeRange range, std::uint64_t seed) {
    validate(cfg);
    if (total_alerts == 1) throw ConfigError("an APT alert count of 1 cannot form a scenario");
    std::vector<Campaign> out;
    Rng master = make_stream(seed, StreamTag::campaign_plan);
    std::unordered_set<Ipv4> used_hosts;
    const auto campus = env.campus_host_count();

    std::size_t remaining = total_alerts;
    for (std::size_t index = 0; remaining > 0; ++index) {
        CampaignRequest req;
        req.campaign_id = "C" + std::to_string(index + 1);
        req.first_scenario_id = index * 32 + 1;
        const int cap = cfg.length_cap;
        if (remaining <= static_cast<std::size_t>(cap)) {
            req.exact = true;
            req.target_length = static_cast<int>(remaining);
            req.cap = req.target_length;
        } else {
            // Keep at least two alerts for whatever campaign comes next.
            req.cap = static_cast<int>(std::min<std::size_t>(cap, remaining - 2));
            req.target_length = std::min(draw_campaign_length(cfg, master), req.cap);
        }
        for (int h = 0; h < cfg.host_pool_size; ++h) {
            if (used_hosts.size() + 1 >= campus) throw GenerationError("campus network too small for campaign host pools");
            Ipv4 ip;
            do ip = env.sample(AddressClass::campus, master);
            while (used_hosts.contains(ip));
            used_hosts.insert(ip);
            req.host_pool.push_back(ip);
        }
        Rng rng = make_stream(seed, StreamTag::campaign, index);
        Campaign c = generate_campaign(req, cfg, env, mapping, delta_t, range, rng);
        if (c.alerts.empty()) throw GenerationError("campaign " + req.campaign_id + " produced no alerts");
        remaining -= c.alerts.size();
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace aptsynth
