#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "aptsynth/alert.hpp"

namespace aptsynth {

// Total map from alert type to lifecycle step. The table is always total by
// construction; loaders reject partial input.
class StepMapping {
public:
    StepMapping(std::string name, const std::array<AptStep, kAlertTypeCount>& entries);

    const std::string& name() const { return name_; }
    AptStep step_of(AlertType t) const { return entries_[index_of(t)]; }
    // Types assigned to `s`, in canonical type order. May be empty for
    // non-canonical mappings.
    const std::vector<AlertType>& types_of(AptStep s) const { return by_step_[index_of(s)]; }
    const std::array<AptStep, kAlertTypeCount>& entries() const { return entries_; }

    // Copy with selected types moved to other steps.
    StepMapping with_overrides(std::string name,
                               std::initializer_list<std::pair<AlertType, AptStep>> moves) const;

    // JSON object {"name": "...", "entries": {"scan_alert": "D", ...}}; the
    // "entries" wrapper is optional. Throws TaxonomyError unless all 14 types
    // are present exactly once with a valid step letter.
    static StepMapping from_json_text(std::string_view text);
    static StepMapping load(const std::filesystem::path& path);
    std::string to_json_text() const;

    friend bool operator==(const StepMapping& a, const StepMapping& b) { return a.entries_ == b.entries_; }

private:
    std::string name_;
    std::array<AptStep, kAlertTypeCount> entries_;
    std::array<std::vector<AlertType>, kStepCount> by_step_;
};

StepMapping canonical_mapping();

// Variant where scan_alert opens the chain (A), phishing_alert is C&C (B) and
// tor_alert is treated as escalation (C).
StepMapping scan_entry_mapping();
// Variant where hash_alert is escalation (C) and network_intrusion_alert is
// discovery (D).
StepMapping hash_escalation_mapping();

// "canonical", "scan-entry", "hash-escalation"; anything else is treated as a
// path to a mapping file.
StepMapping mapping_by_name_or_path(std::string_view name_or_path);

// Name lookup against a serialized mapping name; throws TaxonomyError on unknown names.
AptStep step_of(std::string_view alert_type_name, const StepMapping& mapping);
inline AptStep step_of(AlertType t, const StepMapping& mapping) { return mapping.step_of(t); }

}  // namespace aptsynth
