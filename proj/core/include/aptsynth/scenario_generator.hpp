#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aptsynth/alert.hpp"
#include "aptsynth/network_environment.hpp"
#include "aptsynth/rng.hpp"
#include "aptsynth/step_mapping.hpp"

namespace aptsynth {

enum class ShapeKind : std::uint8_t { full, four_step, three_step, two_step };
std::string_view shape_kind_name(ShapeKind k);

struct ScenarioShape {
    StepSet steps;
    ShapeKind kind = ShapeKind::full;

    // Kind follows from the number of steps (2..5).
    static ScenarioShape of(StepSet steps);
    std::vector<AptStep> ordered_steps() const;
    std::string name() const { return steps.to_string(); }

    friend bool operator==(const ScenarioShape&, const ScenarioShape&) = default;
};

inline constexpr std::size_t kShapeCount = 10;

// ABCDE, ABCD, BCDE, ABC, BCD, ABE, AB, BC, CD, DE.
const std::array<ScenarioShape, kShapeCount>& enumerate_shapes();
// Index into enumerate_shapes(), or nullopt for a step set that is not one of
// the ten chain shapes.
std::optional<std::size_t> shape_index(StepSet steps);

using ShapeWeights = std::array<double, kShapeCount>;
// Full 40%; the four-, three- and two-step groups 20% each, split evenly
// inside a group.
ShapeWeights default_shape_weights();

// Inter-alert gaps are log-uniform on [min_gap, max_gap_fraction * delta_t].
struct GapLaw {
    DurationSeconds min_gap = kMinute;
    double max_gap_fraction = 1.0 / 6.0;
};

struct ScenarioRequest {
    ScenarioShape shape;
    EpochSeconds start = 0;
    std::optional<Ipv4> host;  // drawn from campus when absent
    std::uint64_t scenario_id = 0;
    std::string campaign_id = "C0";
};

// One alert per step of the shape, step order = time order, shared host.
// alert_id is left at 0 for the caller to assign. Throws ConfigError when a
// step of the shape has no alert type under `mapping`.
std::vector<Alert> generate_scenario(const ScenarioRequest& request, const StepMapping& mapping,
                                     const NetworkEnvironment& env, DurationSeconds delta_t, Rng& rng,
                                     const GapLaw& gaps = {});

// Expected share of each alert type among scenario alerts, ignoring truncation.
std::array<double, kAlertTypeCount> expected_type_composition(const StepMapping& mapping,
                                                              const ShapeWeights& weights);

struct CampaignConfig {
    int length_min = 8;
    int length_max = 28;
    int length_cap = 30;
    int host_pool_size = 3;
    ShapeWeights shape_weights = default_shape_weights();
    GapLaw gaps;
    // Scenarios of a campaign are separated by delta_t + 1 s plus a uniform
    // jitter of up to this fraction of delta_t.
    double separation_jitter = 0.25;
};

void validate(const CampaignConfig& cfg);

struct ScenarioInstance {
    std::uint64_t scenario_id = 0;
    ScenarioShape shape;
    Ipv4 host;
    std::size_t first_alert = 0;
    std::size_t alert_count = 0;
};

struct Campaign {
    std::string campaign_id;
    std::vector<Ipv4> host_pool;
    std::vector<ScenarioInstance> scenarios;
    EpochSeconds start = 0;
    std::vector<Alert> alerts;  // time-ordered
};

struct CampaignRequest {
    std::string campaign_id;
    std::vector<Ipv4> host_pool;
    int target_length = 0;
    // Hard upper bound on the number of alerts.
    int cap = 30;
    // Produce exactly target_length alerts (target_length >= 2).
    bool exact = false;
    std::uint64_t first_scenario_id = 1;
    std::optional<ScenarioShape> forced_shape;
};

// Adds scenarios until the target is reached; the scenario crossing the cap
// is cut to a prefix of its steps (a one-alert remainder is dropped). The
// whole campaign is placed uniformly inside `range`; GenerationError when it
// does not fit.
Campaign generate_campaign(const CampaignRequest& request, const CampaignConfig& cfg, const NetworkEnvironment& env,
                           const StepMapping& mapping, DurationSeconds delta_t, TimeRange range, Rng& rng);

int draw_campaign_length(const CampaignConfig& cfg, Rng& rng);

// Campaigns C1, C2, ... whose sizes sum to exactly `total_alerts`. Host pools
// are disjoint across campaigns. Campaign i uses the stream (seed, campaign, i).
std::vector<Campaign> plan_campaigns(std::size_t total_alerts, const CampaignConfig& cfg,
                                     const NetworkEnvironment& env, const StepMapping& mapping,
                                     DurationSeconds delta_t, TimeRange range, std::uint64_t seed);

}  // namespace aptsynth
