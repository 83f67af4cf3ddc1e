#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aptsynth/alert.hpp"
#include "aptsynth/alert_rules.hpp"
#include "aptsynth/network_environment.hpp"
#include "aptsynth/step_mapping.hpp"

namespace fixtures {

using namespace aptsynth;

inline constexpr EpochSeconds kT0 = 1706745600;  // 2024-02-01T00:00:00Z

inline Ipv4 campus_host(int n) { return Ipv4{10, 20, static_cast<std::uint8_t>(n / 250), static_cast<std::uint8_t>(1 + n % 250)}; }

// Hand-built alert with consistent attributes: src = infected = host, scan
// alerts carry scanned_host = dest.
inline Alert alert(std::uint64_t id, AlertType type, EpochSeconds ts, Ipv4 host,
                   const StepMapping& mapping = canonical_mapping()) {
    Alert a;
    a.alert_id = id;
    a.alert_type = type;
    a.timestamp = ts;
    a.src_ip = host;
    a.infected_host = host;
    a.src_port = 50000;
    a.step = mapping.step_of(type);
    const auto& rule = destination_rule(type);
    a.dest_port = rule.port_range ? rule.lo : rule.ports.front();
    switch (rule.dest_class) {
        case AddressClass::campus: a.dest_ip = Ipv4{10, 20, 200, 200}; break;
        case AddressClass::external: a.dest_ip = Ipv4{203, 0, 113, 10}; break;
        case AddressClass::blacklist: a.dest_ip = Ipv4{203, 0, 113, 20}; break;
        case AddressClass::tor_exit: a.dest_ip = Ipv4{203, 0, 113, 30}; break;
        case AddressClass::cnc: a.dest_ip = Ipv4{203, 0, 113, 40}; break;
    }
    if (type == AlertType::scan_alert) a.scanned_host = a.dest_ip;
    return a;
}

// Small environment whose special lists match the addresses used by alert().
inline NetworkEnvironment tiny_environment() {
    NetworkEnvironment::Spec spec;
    spec.campus_cidr = Ipv4Prefix{Ipv4{10, 20, 0, 0}, 16};
    spec.external_pool = {Ipv4Prefix{Ipv4{203, 0, 113, 0}, 24}};
    spec.ip_blacklist = {Ipv4{203, 0, 113, 20}, Ipv4{203, 0, 113, 21}};
    spec.tor_exit_nodes = {Ipv4{203, 0, 113, 30}, Ipv4{203, 0, 113, 31}, Ipv4{203, 0, 113, 32}};
    spec.cnc_pool = {Ipv4{203, 0, 113, 40}};
    return NetworkEnvironment(spec);
}

}  // namespace fixtures
