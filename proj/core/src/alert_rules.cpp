#include "aptsynth/alert_rules.hpp"

#include <algorithm>
#include <array>

namespace aptsynth {

namespace {

DestinationRule fixed(AddressClass c, std::uint16_t port) { return {c, {port}}; }

const std::array<DestinationRule, kAlertTypeCount>& rule_table() {
    static const std::array<DestinationRule, kAlertTypeCount> table = [] {
        std::array<DestinationRule, kAlertTypeCount> t;
        auto set = [&](AlertType type, DestinationRule r) { t[index_of(type)] = std::move(r); };
        set(AlertType::disguised_exe_alert, fixed(AddressClass::external, 80));
        set(AlertType::hash_alert, fixed(AddressClass::external, 80));
        set(AlertType::malware_download_alert, fixed(AddressClass::external, 80));
        set(AlertType::malicious_link_click_alert, fixed(AddressClass::external, 80));
        set(AlertType::ssl_alert, fixed(AddressClass::external, 443));
        set(AlertType::kernel_exploit_attempt_alert, fixed(AddressClass::external, 443));
        set(AlertType::domain_alert, fixed(AddressClass::campus, 53));
        set(AlertType::domain_flux_alert, fixed(AddressClass::campus, 53));
        set(AlertType::phishing_alert, fixed(AddressClass::campus, 53));
        set(AlertType::ip_alert, fixed(AddressClass::blacklist, 443));
        set(AlertType::network_intrusion_alert,
            DestinationRule{AddressClass::blacklist, {22, 23, 445, 1433, 3306, 3389, 5900}});
        set(AlertType::scan_alert, DestinationRule{AddressClass::campus, {}, true, 1, 1024});
        set(AlertType::tor_alert, fixed(AddressClass::tor_exit, 443));
        set(AlertType::data_exfiltration_alert, fixed(AddressClass::cnc, 443));
        return t;
    }();
    return table;
}

}  // namespace

bool DestinationRule::allows_port(std::uint16_t port) const {
    if (port_range) return port >= lo && port <= hi;
    return std::find(ports.begin(), ports.end(), port) != ports.end();
}

const DestinationRule& destination_rule(AlertType t) { return rule_table()[index_of(t)]; }

void assign_network_attributes(Alert& a, Ipv4 src, const NetworkEnvironment& env, Rng& rng) {
    const DestinationRule& rule = destination_rule(a.alert_type);
    a.src_ip = src;
    a.infected_host = src;
    a.src_port = uniform_int<std::uint16_t>(rng, kEphemeralPortMin, kEphemeralPortMax);
    a.dest_ip = rule.dest_class == AddressClass::campus ? env.sample_campus_except(src, rng)
                                                        : env.sample(rule.dest_class, rng);
    if (rule.port_range)
        a.dest_port = uniform_int<std::uint16_t>(rng, rule.lo, rule.hi);
    else if (rule.ports.size() == 1)
        a.dest_port = rule.ports.front();
    else
        a.dest_port = rule.ports[uniform_int<std::size_t>(rng, 0, rule.ports.size() - 1)];
    if (a.alert_type == AlertType::scan_alert)
        a.scanned_host = a.dest_ip;
    else
        a.scanned_host.reset();
}

std::vector<std::string> attribute_violations(const Alert& a, const NetworkEnvironment& env) {
    std::vector<std::string> out;
    const DestinationRule& rule = destination_rule(a.alert_type);
    const std::string who = "alert " + std::to_string(a.alert_id) + ": ";
    if (env.classify(a.src_ip) != AddressClass::campus) out.push_back(who + "src_ip outside campus");
    if (a.src_port < kEphemeralPortMin) out.push_back(who + "src_port outside the dynamic range");
    if (a.infected_host != a.src_ip) out.push_back(who + "infected_host differs from src_ip");
    if (env.classify(a.dest_ip) != rule.dest_class)
        out.push_back(who + "dest_ip is " + std::string(address_class_name(env.classify(a.dest_ip))) + ", expected " +
                      std::string(address_class_name(rule.dest_class)));
    if (rule.dest_class == AddressClass::campus && a.dest_ip == a.src_ip)
        out.push_back(who + "dest_ip equals src_ip");
    if (!rule.allows_port(a.dest_port)) out.push_back(who + "dest_port not allowed for " +
                                                      std::string(alert_type_name(a.alert_type)));
    const bool is_scan = a.alert_type == AlertType::scan_alert;
    if (is_scan != a.scanned_host.has_value()) out.push_back(who + "scanned_host presence does not match type");
    if (is_scan && a.scanned_host && *a.scanned_host != a.dest_ip) out.push_back(who + "scanned_host differs from dest_ip");
    return out;
}

}  // namespace aptsynth
