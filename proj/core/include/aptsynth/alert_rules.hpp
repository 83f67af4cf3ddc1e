#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aptsynth/alert.hpp"
#include "aptsynth/network_environment.hpp"
#include "aptsynth/rng.hpp"

namespace aptsynth {

inline constexpr std::uint16_t kEphemeralPortMin = 49152;
inline constexpr std::uint16_t kEphemeralPortMax = 65535;

// Destination a given alert type points at. `ports` lists the allowed
// destination ports; when `port_range` is set the ports are [lo, hi] instead.
struct DestinationRule {
    AddressClass dest_class;
    std::vector<std::uint16_t> ports;
    bool port_range = false;
    std::uint16_t lo = 0;
    std::uint16_t hi = 0;

    bool allows_port(std::uint16_t port) const;
};

const DestinationRule& destination_rule(AlertType t);

// Fills the network attributes of `a` for source host `src`: ephemeral source
// port, destination per the type's rule, infected_host = src and, for scans,
// scanned_host = dest_ip. alert_type must already be set.
void assign_network_attributes(Alert& a, Ipv4 src, const NetworkEnvironment& env, Rng& rng);

// Human-readable list of attribute-rule violations; empty when `a` conforms.
std::vector<std::string> attribute_violations(const Alert& a, const NetworkEnvironment& env);

}  // namespace aptsynth
