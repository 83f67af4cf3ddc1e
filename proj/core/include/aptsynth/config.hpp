#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aptsynth/correlation.hpp"
#include "aptsynth/network_environment.hpp"
#include "aptsynth/noise_generator.hpp"
#include "aptsynth/scenario_generator.hpp"

namespace aptsynth {

inline constexpr const char* kConfigEnvVar = "APTSYNTH_CONFIG";

struct EnvironmentConfig {
    Ipv4Prefix campus_cidr{Ipv4{10, 20, 0, 0}, 16};
    std::vector<Ipv4Prefix> external_pool{Ipv4Prefix{Ipv4{203, 0, 113, 0}, 24}, Ipv4Prefix{Ipv4{198, 51, 100, 0}, 24},
                                          Ipv4Prefix{Ipv4{192, 0, 2, 0}, 24}};
    // Explicit lists replace the seeded draw of the same list.
    std::optional<std::vector<Ipv4>> ip_blacklist;
    std::optional<std::vector<Ipv4>> tor_exit_nodes;
    std::optional<std::vector<Ipv4>> cnc_pool;
    int blacklist_count = 32;
    int tor_count = 16;
    int cnc_count = 8;
};

struct RunConfig {
    std::uint64_t seed = 42;
    std::size_t noise_count = 72000;
    std::size_t apt_count = 48000;
    EnvironmentConfig environment;
    // "canonical", "scan-entry", "hash-escalation", a mapping file path, or
    // inline JSON text.
    std::string mapping = "canonical";
    NoiseConfig noise;
    // When false the noise type weights are derived so that the whole dataset
    // matches reported_type_shares().
    bool noise_weights_explicit = false;
    CampaignConfig campaigns;
    CorrelationParams correlation;
    std::filesystem::path out_dir = "out";

    std::size_t total() const { return noise_count + apt_count; }
};

// Strict: unknown keys and ill-typed values raise ConfigError. Missing keys
// keep their defaults.
RunConfig config_from_json(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

void validate(const RunConfig& cfg);

NetworkEnvironment build_environment(const RunConfig& cfg);
StepMapping resolve_mapping(const RunConfig& cfg);
// Noise settings with calibrated type weights unless explicitly configured.
NoiseConfig effective_noise_config(const RunConfig& cfg, const StepMapping& mapping);

}  // namespace aptsynth
