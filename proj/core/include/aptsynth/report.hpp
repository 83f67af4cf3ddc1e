#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aptsynth/dataset.hpp"

namespace aptsynth {

struct CampaignSpan {
    std::string campaign_id;
    EpochSeconds first = 0;
    EpochSeconds last = 0;
    std::size_t alerts = 0;

    friend bool operator==(const CampaignSpan&, const CampaignSpan&) = default;
};

struct DailyCount {
    std::size_t apt = 0;
    std::size_t non_apt = 0;

    friend bool operator==(const DailyCount&, const DailyCount&) = default;
};

struct DatasetReport {
    std::size_t total = 0;
    std::size_t apt = 0;      // rows carrying a campaign id
    std::size_t non_apt = 0;  // rows without one

    std::array<std::size_t, kAlertTypeCount> per_type{};
    std::array<std::size_t, kStepCount> per_step{};
    std::array<std::size_t, kStepCount> per_step_campaign{};
    std::array<std::size_t, 24> hourly{};
    std::array<std::size_t, 7> weekday{};  // Monday first
    std::map<std::uint16_t, std::size_t> dest_ports;
    std::array<std::size_t, 5> corr_final{};  // per alert
    std::array<std::size_t, 4> labels{};      // per alert
    std::array<std::size_t, 4> cluster_labels{};
    std::size_t clusters = 0;

    std::size_t campaigns = 0;
    double campaign_mean_length = 0.0;
    std::size_t campaign_max_length = 0;
    std::vector<CampaignSpan> campaign_spans;  // ordered by first alert

    std::map<std::string, DailyCount> daily;  // "YYYY-MM-DD"

    double type_percentage(AlertType t) const;

    friend bool operator==(const DatasetReport&, const DatasetReport&) = default;
};

// PipelineError on empty input.
DatasetReport summarize(std::span<const DatasetRecord> records);

// Stable key order; numbers in shortest round-trip form.
std::string report_json(const DatasetReport& r);

// Names of the per-figure CSV files written by write_report.
const std::vector<std::string>& figure_files();

// report.json plus one CSV per figure inside `dir`.
void write_report(const std::filesystem::path& dir, const DatasetReport& r);

}  // namespace aptsynth
