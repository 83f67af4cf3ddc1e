#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aptsynth/alert.hpp"
#include "aptsynth/correlation.hpp"

namespace aptsynth {

struct DatasetRecord {
    Alert alert;
    std::optional<std::uint64_t> cluster_id;
    int corr_final = 0;
    ScenarioLabel label = ScenarioLabel::non_apt;

    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

// Column order of the raw alert file.
const std::vector<std::string>& raw_columns();
// Raw columns followed by cluster_id, corr_final, label.
const std::vector<std::string>& dataset_columns();

// Joins alerts with the per-alert assignment of a correlation run.
std::vector<DatasetRecord> attach_correlation(std::span<const Alert> alerts, const CorrelationOutput& out);

// RFC-4180 CSV with a mandatory header. Cells containing a comma, quote or
// line break are quoted.
void write_alerts(std::ostream& out, std::span<const Alert> alerts);
void write_alerts(const std::filesystem::path& path, std::span<const Alert> alerts);
void write_dataset(std::ostream& out, std::span<const DatasetRecord> records);
void write_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records);

// Accepts both the raw and the correlated layout (extra columns ignored).
// ParseError with the line number on malformed rows; ParseError on a
// preprocessed header.
std::vector<Alert> read_alerts(std::istream& in);
std::vector<Alert> read_alerts(const std::filesystem::path& path);
// Requires the correlated layout.
std::vector<DatasetRecord> read_dataset(std::istream& in);
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);

// Low-level CSV helpers, exposed for the tools and tests.
std::string csv_escape(std::string_view cell);
// Splits one physical record; `in` may continue over several lines when a
// quoted cell contains a line break. Returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& cells, std::size_t& line);

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

inline constexpr std::size_t kFeatureCount = 31;
inline constexpr std::string_view kNoCampaignSentinel = "NONE";

struct PreprocessedTable {
    std::vector<std::string> feature_columns;  // kFeatureCount names
    std::vector<std::array<double, kFeatureCount>> rows;
    std::vector<ScenarioLabel> labels;  // target column, parallel to rows
};

const std::vector<std::string>& feature_columns();

// One-hot type (14), step (5), protocol (4); min-max scaled src/dest port,
// hour, weekday, month and time since the campaign's first alert; corr_final
// / 4; has_campaign flag. PipelineError on empty input.
PreprocessedTable preprocess(std::span<const DatasetRecord> records);

void write_preprocessed(std::ostream& out, const PreprocessedTable& table);
void write_preprocessed(const std::filesystem::path& path, const PreprocessedTable& table);

// Shortest round-tripping decimal form.
std::string format_number(double v);

}  // namespace aptsynth
