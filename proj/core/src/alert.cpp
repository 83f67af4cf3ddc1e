#include "aptsynth/alert.hpp"

#include <charconv>

#include "aptsynth/error.hpp"

namespace aptsynth {

namespace {

constexpr std::array<std::string_view, kAlertTypeCount> kTypeNames{
    "disguised_exe_alert",
    "hash_alert",
    "domain_alert",
    "ip_alert",
    "ssl_alert",
    "domain_flux_alert",
    "scan_alert",
    "tor_alert",
    "phishing_alert",
    "malware_download_alert",
    "kernel_exploit_attempt_alert",
    "malicious_link_click_alert",
    "data_exfiltration_alert",
    "network_intrusion_alert",
};

// Ordered as AlertType.
constexpr std::array<int, kAlertTypeCount> kSeverity{
    2,  // disguised_exe
    2,  // hash
    2,  // domain
    3,  // ip
    3,  // ssl
    3,  // domain_flux
    1,  // scan
    4,  // tor
    2,  // phishing
    2,  // malware_download
    5,  // kernel_exploit_attempt
    2,  // malicious_link_click
    5,  // data_exfiltration
    4,  // network_intrusion
};

}  // namespace

char step_letter(AptStep s) { return static_cast<char>('A' + index_of(s)); }

std::string_view step_description(AptStep s) {
    switch (s) {
        case AptStep::A: return "Point of entry";
        case AptStep::B: return "C&C communication";
        case AptStep::C: return "Privilege escalation";
        case AptStep::D: return "Asset/Data discovery";
        case AptStep::E: return "Data exfiltration";
    }
    return {};
}

AptStep parse_step(std::string_view letter) {
    if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'E')
        throw TaxonomyError("unknown APT step '" + std::string(letter) + "'");
    return static_cast<AptStep>(letter[0] - 'A');
}

std::string_view alert_type_name(AlertType t) { return kTypeNames[index_of(t)]; }

std::optional<AlertType> try_parse_alert_type(std::string_view name) {
    for (std::size_t i = 0; i < kAlertTypeCount; ++i)
        if (kTypeNames[i] == name) return alert_type_at(i);
    return std::nullopt;
}

AlertType parse_alert_type(std::string_view name) {
    if (auto t = try_parse_alert_type(name)) return *t;
    throw TaxonomyError("unknown alert type '" + std::string(name) + "'");
}

int severity_of(AlertType t) { return kSeverity[index_of(t)]; }

std::string_view protocol_name(Protocol p) {
    switch (p) {
        case Protocol::HTTP: return "HTTP";
        case Protocol::DNS: return "DNS";
        case Protocol::HTTPS: return "HTTPS";
        case Protocol::TCP_OTHER: return "TCP_OTHER";
    }
    return {};
}

Protocol protocol_for_port(std::uint16_t port) {
    switch (port) {
        case 80: return Protocol::HTTP;
        case 53: return Protocol::DNS;
        case 443: return Protocol::HTTPS;
        default: return Protocol::TCP_OTHER;
    }
}

Protocol default_protocol(AlertType t) {
    switch (t) {
        case AlertType::disguised_exe_alert:
        case AlertType::hash_alert:
        case AlertType::malware_download_alert:
        case AlertType::malicious_link_click_alert: return Protocol::HTTP;
        case AlertType::domain_alert:
        case AlertType::domain_flux_alert:
        case AlertType::phishing_alert: return Protocol::DNS;
        case AlertType::ip_alert:
        case AlertType::ssl_alert:
        case AlertType::tor_alert:
        case AlertType::data_exfiltration_alert:
        case AlertType::kernel_exploit_attempt_alert: return Protocol::HTTPS;
        case AlertType::scan_alert:
        case AlertType::network_intrusion_alert: return Protocol::TCP_OTHER;
    }
    return Protocol::TCP_OTHER;
}

std::string StepSet::to_string() const {
    std::string out;
    for (auto s : kAllSteps)
        if (contains(s)) out += step_letter(s);
    return out;
}

StepSet StepSet::parse(std::string_view letters) {
    StepSet set;
    for (char c : letters) {
        const AptStep s = parse_step(std::string_view(&c, 1));
        if (set.contains(s)) throw TaxonomyError("repeated step in '" + std::string(letters) + "'");
        set.insert(s);
    }
    return set;
}

std::string GroundTruth::to_string() const {
    if (kind == Kind::noise) return "noise";
    return "scenario:" + std::to_string(scenario_id) + ":" + shape.to_string() + ":" + std::to_string(position);
}

std::optional<GroundTruth> GroundTruth::parse(std::string_view text) {
    if (text == "noise") return GroundTruth::noise();
    constexpr std::string_view prefix = "scenario:";
    if (!text.starts_with(prefix)) return std::nullopt;
    text.remove_prefix(prefix.size());
    const auto c1 = text.find(':');
    if (c1 == std::string_view::npos) return std::nullopt;
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) return std::nullopt;

    std::uint64_t id = 0;
    const auto id_text = text.substr(0, c1);
    auto r1 = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (r1.ec != std::errc{} || r1.ptr != id_text.data() + id_text.size()) return std::nullopt;

    int pos = 0;
    const auto pos_text = text.substr(c2 + 1);
    auto r2 = std::from_chars(pos_text.data(), pos_text.data() + pos_text.size(), pos);
    if (r2.ec != std::errc{} || r2.ptr != pos_text.data() + pos_text.size() || pos < 0) return std::nullopt;

    StepSet shape;
    try {
        shape = StepSet::parse(text.substr(c1 + 1, c2 - c1 - 1));
    } catch (const TaxonomyError&) {
        return std::nullopt;
    }
    if (shape.size() < 2 || pos >= shape.size()) return std::nullopt;
    return GroundTruth::scenario(id, shape, pos);
}

}  // namespace aptsynth
