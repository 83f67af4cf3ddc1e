#include "aptsynth/report.hpp"

#include <fstream>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "aptsynth/error.hpp"

namespace aptsynth {

namespace {

constexpr std::array<std::string_view, 7> kWeekdays{"Monday", "Tuesday", "Wednesday", "Thursday",
                                                    "Friday", "Saturday", "Sunday"};

constexpr std::array<ScenarioLabel, 4> kLabels{ScenarioLabel::non_apt, ScenarioLabel::two_steps,
                                               ScenarioLabel::three_steps, ScenarioLabel::full};

double percent(std::size_t part, std::size_t total) {
    return total ? 100.0 * static_cast<double>(part) / static_cast<double>(total) : 0.0;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

double DatasetReport::type_percentage(AlertType t) const { return percent(per_type[index_of(t)], total); }

DatasetReport summarize(std::span<const DatasetRecord> records) {
    if (records.empty()) throw PipelineError("cannot summarise an empty dataset");
    DatasetReport r;
    r.total = records.size();

    std::map<std::string, CampaignSpan> campaigns;
    std::map<std::uint64_t, ScenarioLabel> cluster_label;
    for (const auto& rec : records) {
        const Alert& a = rec.alert;
        ++r.per_type[index_of(a.alert_type)];
        ++r.per_step[index_of(a.step)];
        ++r.hourly[static_cast<std::size_t>(hour_of_day(a.timestamp))];
        ++r.weekday[static_cast<std::size_t>(day_of_week(a.timestamp))];
        ++r.dest_ports[a.dest_port];
        ++r.corr_final[static_cast<std::size_t>(std::clamp(rec.corr_final, 0, 4))];
        ++r.labels[static_cast<std::size_t>(rec.label)];
        if (rec.cluster_id) cluster_label.emplace(*rec.cluster_id, rec.label);

        auto& day = r.daily[format_date(a.timestamp)];
        if (a.campaign_id) {
            ++r.apt;
            ++day.apt;
            ++r.per_step_campaign[index_of(a.step)];
            auto [it, fresh] = campaigns.try_emplace(*a.campaign_id, CampaignSpan{*a.campaign_id, a.timestamp, a.timestamp, 0});
            it->second.first = std::min(it->second.first, a.timestamp);
            it->second.last = std::max(it->second.last, a.timestamp);
            ++it->second.alerts;
        } else {
            ++r.non_apt;
            ++day.non_apt;
        }
    }
    r.clusters = cluster_label.size();
    for (const auto& [id, label] : cluster_label) ++r.cluster_labels[static_cast<std::size_t>(label)];

    r.campaigns = campaigns.size();
    std::size_t sum = 0;
    for (const auto& [id, span] : campaigns) {
        sum += span.alerts;
        r.campaign_max_length = std::max(r.campaign_max_length, span.alerts);
        r.campaign_spans.push_back(span);
    }
    if (r.campaigns) r.campaign_mean_length = static_cast<double>(sum) / static_cast<double>(r.campaigns);
    std::sort(r.campaign_spans.begin(), r.campaign_spans.end(), [](const CampaignSpan& a, const CampaignSpan& b) {
        return std::tie(a.first, a.campaign_id) < std::tie(b.first, b.campaign_id);
    });
    return r;
}

std::string report_json(const DatasetReport& r) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["total_records"] = r.total;
    j["apt_records"] = r.apt;
    j["non_apt_records"] = r.non_apt;
    j["apt_percentage"] = percent(r.apt, r.total);
    j["non_apt_percentage"] = percent(r.non_apt, r.total);

    ordered_json types = ordered_json::object();
    for (std::size_t t = 0; t < kAlertTypeCount; ++t)
        types[std::string(alert_type_name(alert_type_at(t)))] = {{"count", r.per_type[t]},
                                                                 {"percentage", percent(r.per_type[t], r.total)}};
    j["alert_types"] = types;

    ordered_json steps = ordered_json::object(), steps_campaign = ordered_json::object();
    for (auto s : kAllSteps) {
        steps[std::string(1, step_letter(s))] = r.per_step[index_of(s)];
        steps_campaign[std::string(1, step_letter(s))] = r.per_step_campaign[index_of(s)];
    }
    j["steps_all"] = steps;
    j["steps_campaign"] = steps_campaign;
    j["hourly"] = r.hourly;
    ordered_json weekday = ordered_json::object();
    for (std::size_t d = 0; d < 7; ++d) weekday[std::string(kWeekdays[d])] = r.weekday[d];
    j["weekday"] = weekday;
    ordered_json ports = ordered_json::object();
    for (const auto& [port, count] : r.dest_ports) ports[std::to_string(port)] = count;
    j["dest_ports"] = ports;
    j["corr_final_histogram"] = r.corr_final;

    ordered_json labels = ordered_json::object(), cluster_labels = ordered_json::object();
    for (auto l : kLabels) {
        labels[std::string(label_name(l))] = r.labels[static_cast<std::size_t>(l)];
        cluster_labels[std::string(label_name(l))] = r.cluster_labels[static_cast<std::size_t>(l)];
    }
    j["labels_by_alert"] = labels;
    j["clusters"] = r.clusters;
    j["labels_by_cluster"] = cluster_labels;
    j["campaigns"] = {{"count", r.campaigns},
                      {"mean_length", r.campaign_mean_length},
                      {"max_length", r.campaign_max_length}};
    ordered_json daily = ordered_json::object();
    for (const auto& [date, c] : r.daily) daily[date] = {{"apt", c.apt}, {"non_apt", c.non_apt}};
    j["daily"] = daily;
    return j.dump(2) + "\n";
}

const std::vector<std::string>& figure_files() {
    static const std::vector<std::string> files{
        "fig3_types.csv",          "fig4_campaign_timeline.csv", "fig5a_steps_all.csv",
        "fig5b_steps_campaign.csv", "fig6a_hourly.csv",          "fig6b_weekday.csv",
        "fig7_dest_ports.csv",     "fig8_daily_apt_vs_non_apt.csv", "fig9_correlation_index.csv",
        "fig10_labels.csv",
    };
    return files;
}

void write_report(const std::filesystem::path& dir, const DatasetReport& r) {
    std::filesystem::create_directories(dir);
    write_text(dir / "report.json", report_json(r));
    const auto& files = figure_files();
    std::string s;

    s = "alert_type,count,percentage\n";
    for (std::size_t t = 0; t < kAlertTypeCount; ++t)
        s += std::string(alert_type_name(alert_type_at(t))) + "," + std::to_string(r.per_type[t]) + "," +
             format_number(percent(r.per_type[t], r.total)) + "\n";
    write_text(dir / files[0], s);

    s = "campaign_id,first_alert,last_alert,alerts\n";
    for (const auto& c : r.campaign_spans)
        s += csv_escape(c.campaign_id) + "," + format_iso8601(c.first) + "," + format_iso8601(c.last) + "," +
             std::to_string(c.alerts) + "\n";
    write_text(dir / files[1], s);

    for (int which = 0; which < 2; ++which) {
        const auto& counts = which == 0 ? r.per_step : r.per_step_campaign;
        s = "step,description,count\n";
        for (auto st : kAllSteps)
            s += std::string(1, step_letter(st)) + "," + csv_escape(step_description(st)) + "," +
                 std::to_string(counts[index_of(st)]) + "\n";
        write_text(dir / files[2 + static_cast<std::size_t>(which)], s);
    }

    s = "hour,count\n";
    for (std::size_t h = 0; h < 24; ++h) s += std::to_string(h) + "," + std::to_string(r.hourly[h]) + "\n";
    write_text(dir / files[4], s);

    s = "day_of_week,count\n";
    for (std::size_t d = 0; d < 7; ++d) s += std::string(kWeekdays[d]) + "," + std::to_string(r.weekday[d]) + "\n";
    write_text(dir / files[5], s);

    s = "dest_port,protocol,count\n";
    for (const auto& [port, count] : r.dest_ports)
        s += std::to_string(port) + "," + std::string(protocol_name(protocol_for_port(port))) + "," +
             std::to_string(count) + "\n";
    write_text(dir / files[6], s);

    s = "date,apt,non_apt\n";
    for (const auto& [date, c] : r.daily) s += date + "," + std::to_string(c.apt) + "," + std::to_string(c.non_apt) + "\n";
    write_text(dir / files[7], s);

    s = "corr_final,alerts\n";
    for (std::size_t c = 0; c < r.corr_final.size(); ++c) s += std::to_string(c) + "," + std::to_string(r.corr_final[c]) + "\n";
    write_text(dir / files[8], s);

    s = "label,alerts,clusters\n";
    for (auto l : kLabels)
        s += std::string(label_name(l)) + "," + std::to_string(r.labels[static_cast<std::size_t>(l)]) + "," +
             std::to_string(r.cluster_labels[static_cast<std::size_t>(l)]) + "\n";
    write_text(dir / files[9], s);
}

}  // namespace aptsynth
