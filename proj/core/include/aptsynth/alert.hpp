#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include "aptsynth/ipv4.hpp"
#include "aptsynth/time.hpp"

namespace aptsynth {

// Detectable APT lifecycle steps. Lifecycle index 2..6 follows the kill chain:
// A point of entry, B C&C communication, C privilege escalation,
// D asset/data discovery, E data exfiltration.
enum class AptStep : std::uint8_t { A = 0, B, C, D, E };

inline constexpr std::size_t kStepCount = 5;
inline constexpr std::array<AptStep, kStepCount> kAllSteps{AptStep::A, AptStep::B, AptStep::C, AptStep::D,
                                                           AptStep::E};

constexpr std::size_t index_of(AptStep s) { return static_cast<std::size_t>(s); }
constexpr int lifecycle_index(AptStep s) { return static_cast<int>(s) + 2; }
char step_letter(AptStep s);
std::string_view step_description(AptStep s);
// Throws TaxonomyError for anything but "A".."E".
AptStep parse_step(std::string_view letter);

// The fourteen alert types, in their canonical listing order.
enum class AlertType : std::uint8_t {
    disguised_exe_alert = 0,
    hash_alert,
    domain_alert,
    ip_alert,
    ssl_alert,
    domain_flux_alert,
    scan_alert,
    tor_alert,
    phishing_alert,
    malware_download_alert,
    kernel_exploit_attempt_alert,
    malicious_link_click_alert,
    data_exfiltration_alert,
    network_intrusion_alert,
};

inline constexpr std::size_t kAlertTypeCount = 14;

constexpr std::size_t index_of(AlertType t) { return static_cast<std::size_t>(t); }
constexpr AlertType alert_type_at(std::size_t i) { return static_cast<AlertType>(i); }
std::string_view alert_type_name(AlertType t);
// Throws TaxonomyError on an unknown name.
AlertType parse_alert_type(std::string_view name);
std::optional<AlertType> try_parse_alert_type(std::string_view name);

// 1..5, monotone in how late in the lifecycle the type usually fires.
int severity_of(AlertType t);

enum class Protocol : std::uint8_t { HTTP = 0, DNS, HTTPS, TCP_OTHER };
inline constexpr std::size_t kProtocolCount = 4;
constexpr std::size_t index_of(Protocol p) { return static_cast<std::size_t>(p); }
std::string_view protocol_name(Protocol p);
Protocol protocol_for_port(std::uint16_t dest_port);
Protocol default_protocol(AlertType t);

// Set of steps as a 5-bit mask; used for scenario shapes.
class StepSet {
public:
    constexpr StepSet() = default;
    constexpr StepSet(std::initializer_list<AptStep> steps) {
        for (auto s : steps) bits_ |= bit(s);
    }
    static constexpr StepSet from_bits(std::uint8_t b) {
        StepSet s;
        s.bits_ = b & 0x1f;
        return s;
    }

    constexpr bool contains(AptStep s) const { return bits_ & bit(s); }
    constexpr void insert(AptStep s) { bits_ |= bit(s); }
    constexpr int size() const { return std::popcount(static_cast<unsigned>(bits_)); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint8_t bits() const { return bits_; }

    // "ABCE"
    std::string to_string() const;
    // Throws TaxonomyError on bad letters or repeats.
    static StepSet parse(std::string_view letters);

    friend constexpr bool operator==(StepSet, StepSet) = default;

private:
    static constexpr std::uint8_t bit(AptStep s) { return std::uint8_t(1u << index_of(s)); }
    std::uint8_t bits_ = 0;
};

// Provenance of a generated alert.
struct GroundTruth {
    enum class Kind : std::uint8_t { noise, scenario };

    Kind kind = Kind::noise;
    std::uint64_t scenario_id = 0;  // unique per generated scenario instance
    StepSet shape;                  // steps of the scenario the alert belongs to
    int position = 0;               // 0-based position inside the scenario

    static GroundTruth noise() { return {}; }
    static GroundTruth scenario(std::uint64_t id, StepSet shape, int position) {
        return {Kind::scenario, id, shape, position};
    }
    bool is_scenario() const { return kind == Kind::scenario; }

    // "noise" or "scenario:<id>:<shape>:<position>"
    std::string to_string() const;
    static std::optional<GroundTruth> parse(std::string_view text);

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Alert {
    std::uint64_t alert_id = 0;
    AlertType alert_type = AlertType::disguised_exe_alert;
    EpochSeconds timestamp = 0;
    Ipv4 src_ip;
    std::uint16_t src_port = 0;
    Ipv4 dest_ip;
    std::uint16_t dest_port = 0;
    Ipv4 infected_host;
    std::optional<Ipv4> scanned_host;
    std::optional<std::string> campaign_id;
    AptStep step = AptStep::A;
    GroundTruth ground_truth;

    Protocol protocol() const { return protocol_for_port(dest_port); }
    int severity() const { return severity_of(alert_type); }

    friend bool operator==(const Alert&, const Alert&) = default;
};

}  // namespace aptsynth
