#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aptsynth/config.hpp"
#include "aptsynth/dataset.hpp"
#include "aptsynth/report.hpp"

namespace aptsynth {

inline constexpr const char* kRawFile = "alerts_raw.csv";
inline constexpr const char* kDatasetFile = "alerts_dataset.csv";
inline constexpr const char* kPreprocessedFile = "alerts_dataset_preprocessed.csv";
inline constexpr const char* kReportDir = "report";

struct GeneratedDataset {
    std::vector<Campaign> campaigns;
    std::vector<Alert> alerts;  // ordered by (timestamp, alert_id)
    NoiseBatchStats noise_stats;
};

// Campaign alerts get ids 1..apt_count in campaign order, noise alerts follow.
// Noise is re-rolled until it neither touches campaign hosts within delta_t
// nor forms a cluster with corr_final > 0 next to the campaign alerts.
GeneratedDataset assemble_dataset(const RunConfig& cfg, const NetworkEnvironment& env, const StepMapping& mapping);

std::vector<DatasetRecord> correlate_alerts(std::span<const Alert> alerts, const RunConfig& cfg,
                                            const StepMapping& mapping);

// Per-alert invariants: attribute rules, step = mapping(type), scanned_host
// iff scan, campaign id iff scenario ground truth, unique ids, timestamp in
// range. Returns one message per violation.
std::vector<std::string> validate_alerts(std::span<const Alert> alerts, const NetworkEnvironment& env,
                                         const StepMapping& mapping, TimeRange range);

// validate_alerts plus cluster invariants and label consistency.
std::vector<std::string> validate_records(std::span<const DatasetRecord> records, const NetworkEnvironment& env,
                                          const StepMapping& mapping, const CorrelationParams& params,
                                          TimeRange range);

struct RunSummary {
    std::filesystem::path raw;
    std::filesystem::path dataset;
    std::filesystem::path preprocessed;
    std::filesystem::path report_dir;
    std::size_t rows = 0;
    std::size_t clusters = 0;
    DatasetReport report;
};

// generate -> correlate -> preprocess -> report, all files under cfg.out_dir.
RunSummary run_all(const RunConfig& cfg);

}  // namespace aptsynth
