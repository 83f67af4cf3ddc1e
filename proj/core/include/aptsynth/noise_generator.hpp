#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "aptsynth/alert.hpp"
#include "aptsynth/correlation.hpp"
#include "aptsynth/network_environment.hpp"
#include "aptsynth/rng.hpp"
#include "aptsynth/step_mapping.hpp"

namespace aptsynth {

using TypeWeights = std::array<double, kAlertTypeCount>;

// Per-type shares (fractions) the full dataset is expected to show: scan 12.9%,
// tor 10.6%, data exfiltration 7.7%, kernel exploit 7.6%, network intrusion
// 7.5%, the remaining nine types sharing the rest evenly.
TypeWeights reported_type_shares();

// Noise weights that make the mixture of noise (1 - apt_fraction) and scenario
// alerts (apt_fraction, composed as `apt_composition`) match `targets`.
// Negative solutions are clamped to zero and the result renormalised.
TypeWeights calibrated_noise_weights(const TypeWeights& targets, const TypeWeights& apt_composition,
                                     double apt_fraction);

// Linearly declining from 1.0 at 00h to 0.5 at 23h.
std::array<double, 24> default_hourly_profile();

struct NoiseConfig {
    TypeWeights type_weights = reported_type_shares();
    std::array<double, 24> hourly_weights = default_hourly_profile();
    std::array<double, 7> weekday_weights{1, 1, 1, 1, 1, 1, 1};  // Monday first
    TimeRange time_range = kDefaultTimeRange;
    int retry_bound = 16;
};

void validate(const NoiseConfig& cfg);

// Day by weekday weight, hour by hourly weight, second uniform; always inside
// cfg.time_range.
EpochSeconds sample_noise_timestamp(const NoiseConfig& cfg, Rng& rng);

Alert generate_noise_alert(const NetworkEnvironment& env, const StepMapping& mapping, const NoiseConfig& cfg,
                           Rng& rng);
Alert generate_noise_alert(AlertType forced, const NetworkEnvironment& env, const StepMapping& mapping,
                           const NoiseConfig& cfg, Rng& rng);

struct NoiseBatchStats {
    std::size_t rounds = 0;
    std::size_t duplicates_rerolled = 0;
    std::size_t reserved_rerolled = 0;
    std::size_t correlated_rerolled = 0;
};

// Re-rolls (new source host and timestamp, same type and id) every alert of
// `batch` that
//   - repeats an earlier (type, src_ip, dest_ip) key within delta_t,
//   - shares its source host with a `reserved` alert within delta_t, or
//   - ends up in a cluster with corr_final > 0 when `batch` and `reserved`
//     are correlated together.
// Repeats until clean; GenerationError after cfg.retry_bound rounds.
NoiseBatchStats reroll_noise(std::vector<Alert>& batch, std::span<const Alert> reserved,
                             const NetworkEnvironment& env, const StepMapping& mapping, const NoiseConfig& cfg,
                             const CorrelationParams& params, std::uint64_t seed);

// n noise alerts with ids first_id, first_id + 1, ...; alert i is drawn from
// the stream (seed, noise_segment, i), so the batch does not depend on
// params.threads. Runs reroll_noise before returning.
std::vector<Alert> generate_noise_batch(std::size_t n, const NetworkEnvironment& env, const StepMapping& mapping,
                                        const NoiseConfig& cfg, const CorrelationParams& params, std::uint64_t seed,
                                        std::uint64_t first_id = 1, std::span<const Alert> reserved = {},
                                        NoiseBatchStats* stats = nullptr);

}  // namespace aptsynth
