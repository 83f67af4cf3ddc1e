#include "aptsynth/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_map>

#include "aptsynth/error.hpp"

namespace aptsynth {

namespace {

enum Col : std::size_t {
    kId,
    kType,
    kTimestamp,
    kSrcIp,
    kSrcPort,
    kDestIp,
    kDestPort,
    kInfected,
    kScanned,
    kCampaign,
    kStep,
    kGroundTruth,
    kClusterId,
    kCorrFinal,
    kLabel,
};

template <class Int>
Int parse_int(std::string_view text, std::size_t line, std::string_view column) {
    Int v{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty())
        throw ParseError(line, "bad " + std::string(column) + " '" + std::string(text) + "'");
    return v;
}

Ipv4 parse_ip(std::string_view text, std::size_t line, std::string_view column) {
    auto ip = Ipv4::parse(text);
    if (!ip) throw ParseError(line, "bad " + std::string(column) + " '" + std::string(text) + "'");
    return *ip;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(cells[i]);
    }
    out << '\n';
}

std::vector<std::string> alert_cells(const Alert& a) {
    return {
        std::to_string(a.alert_id),
        std::string(alert_type_name(a.alert_type)),
        format_iso8601(a.timestamp),
        a.src_ip.to_string(),
        std::to_string(a.src_port),
        a.dest_ip.to_string(),
        std::to_string(a.dest_port),
        a.infected_host.to_string(),
        a.scanned_host ? a.scanned_host->to_string() : std::string(),
        a.campaign_id.value_or(std::string()),
        std::string(1, step_letter(a.step)),
        a.ground_truth.to_string(),
    };
}

Alert parse_alert(const std::vector<std::string>& c, std::size_t line) {
    Alert a;
    a.alert_id = parse_int<std::uint64_t>(c[kId], line, "alert_id");
    auto type = try_parse_alert_type(c[kType]);
    if (!type) throw ParseError(line, "unknown alert_type '" + c[kType] + "'");
    a.alert_type = *type;
    auto ts = parse_iso8601(c[kTimestamp]);
    if (!ts) throw ParseError(line, "bad timestamp '" + c[kTimestamp] + "'");
    a.timestamp = *ts;
    a.src_ip = parse_ip(c[kSrcIp], line, "src_ip");
    a.src_port = parse_int<std::uint16_t>(c[kSrcPort], line, "src_port");
    a.dest_ip = parse_ip(c[kDestIp], line, "dest_ip");
    a.dest_port = parse_int<std::uint16_t>(c[kDestPort], line, "dest_port");
    a.infected_host = parse_ip(c[kInfected], line, "infected_host");
    if (!c[kScanned].empty()) a.scanned_host = parse_ip(c[kScanned], line, "scanned_host");
    if (!c[kCampaign].empty()) a.campaign_id = c[kCampaign];
    if (c[kStep].size() != 1 || c[kStep][0] < 'A' || c[kStep][0] > 'E')
        throw ParseError(line, "bad step '" + c[kStep] + "'");
    a.step = static_cast<AptStep>(c[kStep][0] - 'A');
    auto gt = GroundTruth::parse(c[kGroundTruth]);
    if (!gt) throw ParseError(line, "bad ground_truth '" + c[kGroundTruth] + "'");
    a.ground_truth = *gt;
    return a;
}

enum class Layout { raw, dataset };

Layout check_header(const std::vector<std::string>& header) {
    if (!header.empty() && header.size() == kFeatureCount + 1 && header.front() == feature_columns().front())
        throw ParseError(1, "input is already preprocessed; refusing to normalise it again");
    const auto& raw = raw_columns();
    const auto& full = dataset_columns();
    if (header == full) return Layout::dataset;
    if (header == raw) return Layout::raw;
    throw ParseError(1, "unexpected header; expected the " + std::to_string(raw.size()) + "-column alert layout");
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

const std::vector<std::string>& raw_columns() {
    static const std::vector<std::string> cols{"alert_id",  "alert_type",    "timestamp",     "src_ip",
                                               "src_port",  "dest_ip",       "dest_port",     "infected_host",
                                               "scanned_host", "campaign_id", "step",          "ground_truth"};
    return cols;
}

const std::vector<std::string>& dataset_columns() {
    static const std::vector<std::string> cols = [] {
        auto c = raw_columns();
        c.insert(c.end(), {"cluster_id", "corr_final", "label"});
        return c;
    }();
    return cols;
}

std::vector<DatasetRecord> attach_correlation(std::span<const Alert> alerts, const CorrelationOutput& out) {
    if (alerts.size() != out.assignments.size())
        throw ContractViolation("correlation output does not match the alert list");
    std::vector<DatasetRecord> records;
    records.reserve(alerts.size());
    for (std::size_t i = 0; i < alerts.size(); ++i) {
        const auto& asg = out.assignments[i];
        if (asg.alert_id != alerts[i].alert_id) throw ContractViolation("assignment order differs from alert order");
        records.push_back({alerts[i], asg.cluster_id, asg.corr_final, asg.label});
    }
    return records;
}

std::string csv_escape(std::string_view cell) {
    if (cell.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(cell);
    std::string out = "\"";
    for (char ch : cell) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

bool read_csv_record(std::istream& in, std::vector<std::string>& cells, std::size_t& line) {
    cells.clear();
    std::string text;
    do {
        if (!std::getline(in, text)) return false;
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
    } while (text.empty());

    std::string cell;
    bool quoted = false;
    std::size_t i = 0;
    for (;;) {
        if (i == text.size()) {
            if (!quoted) break;
            std::string more;
            if (!std::getline(in, more)) throw ParseError(line, "unterminated quoted cell");
            ++line;
            if (!more.empty() && more.back() == '\r') more.pop_back();
            cell += '\n';
            text = std::move(more);
            i = 0;
            continue;
        }
        const char ch = text[i++];
        if (quoted) {
            if (ch == '"') {
                if (i < text.size() && text[i] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += ch;
            }
        } else if (ch == '"' && cell.empty()) {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += ch;
        }
    }
    cells.push_back(std::move(cell));
    return true;
}

void write_alerts(std::ostream& out, std::span<const Alert> alerts) {
    write_row(out, raw_columns());
    for (const Alert& a : alerts) write_row(out, alert_cells(a));
}

void write_alerts(const std::filesystem::path& path, std::span<const Alert> alerts) {
    auto out = open_out(path);
    write_alerts(out, alerts);
    finish(out, path);
}

void write_dataset(std::ostream& out, std::span<const DatasetRecord> records) {
    write_row(out, dataset_columns());
    for (const DatasetRecord& r : records) {
        auto cells = alert_cells(r.alert);
        cells.push_back(r.cluster_id ? std::to_string(*r.cluster_id) : std::string());
        cells.push_back(std::to_string(r.corr_final));
        cells.emplace_back(label_name(r.label));
        write_row(out, cells);
    }
}

void write_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
    auto out = open_out(path);
    write_dataset(out, records);
    finish(out, path);
}

std::vector<Alert> read_alerts(std::istream& in) {
    std::vector<std::string> cells;
    std::size_t line = 0;
    if (!read_csv_record(in, cells, line)) throw ParseError(1, "missing header row");
    const Layout layout = check_header(cells);
    const std::size_t width = layout == Layout::raw ? raw_columns().size() : dataset_columns().size();
    std::vector<Alert> out;
    while (read_csv_record(in, cells, line)) {
        if (cells.size() != width)
            throw ParseError(line, "expected " + std::to_string(width) + " cells, found " + std::to_string(cells.size()));
        out.push_back(parse_alert(cells, line));
    }
    return out;
}

std::vector<Alert> read_alerts(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_alerts(in);
}

std::vector<DatasetRecord> read_dataset(std::istream& in) {
    std::vector<std::string> cells;
    std::size_t line = 0;
    if (!read_csv_record(in, cells, line)) throw ParseError(1, "missing header row");
    if (check_header(cells) != Layout::dataset)
        throw ParseError(1, "input has no correlation columns; run correlate first");
    const std::size_t width = dataset_columns().size();
    std::vector<DatasetRecord> out;
    while (read_csv_record(in, cells, line)) {
        if (cells.size() != width)
            throw ParseError(line, "expected " + std::to_string(width) + " cells, found " + std::to_string(cells.size()));
        DatasetRecord r;
        r.alert = parse_alert(cells, line);
        if (!cells[kClusterId].empty()) r.cluster_id = parse_int<std::uint64_t>(cells[kClusterId], line, "cluster_id");
        r.corr_final = parse_int<int>(cells[kCorrFinal], line, "corr_final");
        if (r.corr_final < 0 || r.corr_final > 4) throw ParseError(line, "corr_final outside 0..4");
        auto label = parse_label(cells[kLabel]);
        if (!label) throw ParseError(line, "unknown label '" + cells[kLabel] + "'");
        r.label = *label;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_dataset(in);
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

const std::vector<std::string>& feature_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c;
        for (std::size_t t = 0; t < kAlertTypeCount; ++t) c.push_back("type_" + std::string(alert_type_name(alert_type_at(t))));
        for (auto s : kAllSteps) c.push_back(std::string("step_") + step_letter(s));
        for (std::size_t p = 0; p < kProtocolCount; ++p)
            c.push_back("proto_" + std::string(protocol_name(static_cast<Protocol>(p))));
        c.insert(c.end(), {"src_port_norm", "dest_port_norm", "hour_norm", "day_of_week_norm", "month_norm",
                           "elapsed_in_campaign_norm", "corr_final_norm", "has_campaign"});
        return c;
    }();
    return cols;
}

PreprocessedTable preprocess(std::span<const DatasetRecord> records) {
    if (records.empty()) throw PipelineError("cannot preprocess an empty dataset");

    // Pass 1: raw continuous values and their ranges.
    std::map<std::string, EpochSeconds> campaign_start;
    for (const auto& r : records) {
        const std::string id = r.alert.campaign_id.value_or(std::string(kNoCampaignSentinel));
        if (id == kNoCampaignSentinel) continue;
        auto [it, fresh] = campaign_start.try_emplace(id, r.alert.timestamp);
        if (!fresh) it->second = std::min(it->second, r.alert.timestamp);
    }
    constexpr std::size_t kContinuous = 6;
    std::vector<std::array<double, kContinuous>> raw(records.size());
    std::array<double, kContinuous> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const Alert& a = records[i].alert;
        const std::string id = a.campaign_id.value_or(std::string(kNoCampaignSentinel));
        const double elapsed = id == kNoCampaignSentinel ? 0.0 : double(a.timestamp - campaign_start.at(id));
        raw[i] = {double(a.src_port), double(a.dest_port), double(hour_of_day(a.timestamp)),
                  double(day_of_week(a.timestamp)), double(month_of_year(a.timestamp)), elapsed};
        for (std::size_t c = 0; c < kContinuous; ++c) {
            lo[c] = std::min(lo[c], raw[i][c]);
            hi[c] = std::max(hi[c], raw[i][c]);
        }
    }

    // Pass 2: encode.
    PreprocessedTable table;
    table.feature_columns = feature_columns();
    table.rows.resize(records.size());
    table.labels.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        auto& row = table.rows[i];
        row.fill(0.0);
        std::size_t base = 0;
        row[base + index_of(r.alert.alert_type)] = 1.0;
        base += kAlertTypeCount;
        row[base + index_of(r.alert.step)] = 1.0;
        base += kStepCount;
        row[base + index_of(r.alert.protocol())] = 1.0;
        base += kProtocolCount;
        for (std::size_t c = 0; c < kContinuous; ++c)
            row[base + c] = hi[c] > lo[c] ? (raw[i][c] - lo[c]) / (hi[c] - lo[c]) : 0.0;
        base += kContinuous;
        row[base++] = std::clamp(r.corr_final, 0, 4) / 4.0;
        row[base++] = r.alert.campaign_id.value_or(std::string(kNoCampaignSentinel)) != kNoCampaignSentinel ? 1.0 : 0.0;
        table.labels.push_back(r.label);
    }
    return table;
}

std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_preprocessed(std::ostream& out, const PreprocessedTable& table) {
    auto header = table.feature_columns;
    header.emplace_back("label");
    write_row(out, header);
    std::string line;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        line.clear();
        for (double v : table.rows[i]) {
            line += format_number(v);
            line += ',';
        }
        line += label_name(table.labels[i]);
        line += '\n';
        out << line;
    }
}

void write_preprocessed(const std::filesystem::path& path, const PreprocessedTable& table) {
    auto out = open_out(path);
    write_preprocessed(out, table);
    finish(out, path);
}

}  // namespace aptsynth
