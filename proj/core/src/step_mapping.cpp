#include "aptsynth/step_mapping.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aptsynth/error.hpp"

namespace aptsynth {

using A = AlertType;

StepMapping::StepMapping(std::string name, const std::array<AptStep, kAlertTypeCount>& entries)
    : name_(std::move(name)), entries_(entries) {
    for (std::size_t i = 0; i < kAlertTypeCount; ++i) by_step_[index_of(entries_[i])].push_back(alert_type_at(i));
}

StepMapping StepMapping::with_overrides(std::string name,
                                        std::initializer_list<std::pair<AlertType, AptStep>> moves) const {
    auto entries = entries_;
    for (auto [type, step] : moves) entries[index_of(type)] = step;
    return StepMapping(std::move(name), entries);
}

StepMapping StepMapping::from_json_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw TaxonomyError(std::string("step mapping is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw TaxonomyError("step mapping must be a JSON object");

    std::string name = "custom";
    const nlohmann::json* entries = &doc;
    if (auto it = doc.find("entries"); it != doc.end()) {
        entries = &*it;
        if (auto n = doc.find("name"); n != doc.end() && n->is_string()) name = n->get<std::string>();
    }
    if (!entries->is_object()) throw TaxonomyError("step mapping entries must be an object");

    std::array<std::optional<AptStep>, kAlertTypeCount> seen{};
    for (const auto& [key, value] : entries->items()) {
        if (entries == &doc && key == "name") {
            if (value.is_string()) name = value.get<std::string>();
            continue;
        }
        const AlertType t = parse_alert_type(key);
        if (!value.is_string()) throw TaxonomyError("step for '" + key + "' must be a letter A-E");
        if (seen[index_of(t)]) throw TaxonomyError("duplicate entry for '" + key + "'");
        seen[index_of(t)] = parse_step(value.get<std::string>());
    }

    std::array<AptStep, kAlertTypeCount> out{};
    for (std::size_t i = 0; i < kAlertTypeCount; ++i) {
        if (!seen[i])
            throw TaxonomyError("step mapping is not total: missing '" +
                                std::string(alert_type_name(alert_type_at(i))) + "'");
        out[i] = *seen[i];
    }
    return StepMapping(std::move(name), out);
}

StepMapping StepMapping::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open step mapping file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string StepMapping::to_json_text() const {
    nlohmann::ordered_json doc;
    doc["name"] = name_;
    auto& entries = doc["entries"];
    entries = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < kAlertTypeCount; ++i)
        entries[std::string(alert_type_name(alert_type_at(i)))] = std::string(1, step_letter(entries_[i]));
    return doc.dump(2);
}

StepMapping canonical_mapping() {
    std::array<AptStep, kAlertTypeCount> e{};
    auto set = [&](AlertType t, AptStep s) { e[index_of(t)] = s; };
    set(A::disguised_exe_alert, AptStep::A);
    set(A::hash_alert, AptStep::A);
    set(A::domain_alert, AptStep::A);
    set(A::phishing_alert, AptStep::A);
    set(A::malicious_link_click_alert, AptStep::A);
    set(A::malware_download_alert, AptStep::A);
    set(A::ip_alert, AptStep::B);
    set(A::ssl_alert, AptStep::B);
    set(A::domain_flux_alert, AptStep::B);
    set(A::kernel_exploit_attempt_alert, AptStep::C);
    set(A::network_intrusion_alert, AptStep::C);
    set(A::scan_alert, AptStep::D);
    set(A::tor_alert, AptStep::E);
    set(A::data_exfiltration_alert, AptStep::E);
    return StepMapping("canonical", e);
}

StepMapping scan_entry_mapping() {
    return canonical_mapping().with_overrides("scan-entry", {{A::scan_alert, AptStep::A},
                                                             {A::phishing_alert, AptStep::B},
                                                             {A::tor_alert, AptStep::C},
                                                             {A::data_exfiltration_alert, AptStep::E}});
}

StepMapping hash_escalation_mapping() {
    return canonical_mapping().with_overrides("hash-escalation", {{A::malware_download_alert, AptStep::A},
                                                                  {A::hash_alert, AptStep::C},
                                                                  {A::network_intrusion_alert, AptStep::D},
                                                                  {A::data_exfiltration_alert, AptStep::E}});
}

StepMapping mapping_by_name_or_path(std::string_view name_or_path) {
    if (name_or_path.empty() || name_or_path == "canonical") return canonical_mapping();
    if (name_or_path == "scan-entry") return scan_entry_mapping();
    if (name_or_path == "hash-escalation") return hash_escalation_mapping();
    return StepMapping::load(std::filesystem::path(name_or_path));
}

AptStep step_of(std::string_view alert_type_name, const StepMapping& mapping) {
    return mapping.step_of(parse_alert_type(alert_type_name));
}

}  // namespace aptsynth
