#include "aptsynth/pipeline.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "aptsynth/alert_rules.hpp"
#include "aptsynth/error.hpp"

namespace aptsynth {

GeneratedDataset assemble_dataset(const RunConfig& cfg, const NetworkEnvironment& env, const StepMapping& mapping) {
    validate(cfg);
    GeneratedDataset out;
    out.campaigns = plan_campaigns(cfg.apt_count, cfg.campaigns, env, mapping, cfg.correlation.delta_t,
                                   cfg.noise.time_range, cfg.seed);

    std::vector<Alert> campaign_alerts;
    campaign_alerts.reserve(cfg.apt_count);
    for (const auto& c : out.campaigns) campaign_alerts.insert(campaign_alerts.end(), c.alerts.begin(), c.alerts.end());
    for (std::size_t i = 0; i < campaign_alerts.size(); ++i) campaign_alerts[i].alert_id = i + 1;

    const NoiseConfig noise_cfg = effective_noise_config(cfg, mapping);
    auto noise = generate_noise_batch(cfg.noise_count, env, mapping, noise_cfg, cfg.correlation, cfg.seed,
                                      campaign_alerts.size() + 1, campaign_alerts, &out.noise_stats);

    out.alerts = std::move(campaign_alerts);
    out.alerts.insert(out.alerts.end(), std::make_move_iterator(noise.begin()), std::make_move_iterator(noise.end()));
    std::sort(out.alerts.begin(), out.alerts.end(), [](const Alert& a, const Alert& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.alert_id < b.alert_id;
    });
    return out;
}

std::vector<DatasetRecord> correlate_alerts(std::span<const Alert> alerts, const RunConfig& cfg,
                                            const StepMapping& mapping) {
    const auto out = correlate(alerts, cfg.correlation, mapping);
    return attach_correlation(alerts, out);
}

std::vector<std::string> validate_alerts(std::span<const Alert> alerts, const NetworkEnvironment& env,
                                         const StepMapping& mapping, TimeRange range) {
    std::vector<std::string> issues;
    std::unordered_set<std::uint64_t> ids;
    for (const Alert& a : alerts) {
        const std::string who = "alert " + std::to_string(a.alert_id) + ": ";
        if (!ids.insert(a.alert_id).second) issues.push_back(who + "duplicate alert_id");
        if (a.step != mapping.step_of(a.alert_type))
            issues.push_back(who + "step " + step_letter(a.step) + " does not match mapping '" + mapping.name() + "'");
        if (a.campaign_id.has_value() != a.ground_truth.is_scenario())
            issues.push_back(who + "campaign_id must be present exactly for scenario alerts");
        if (!range.contains(a.timestamp)) issues.push_back(who + "timestamp outside the configured range");
        auto attr = attribute_violations(a, env);
        issues.insert(issues.end(), attr.begin(), attr.end());
    }
    return issues;
}

std::vector<std::string> validate_records(std::span<const DatasetRecord> records, const NetworkEnvironment& env,
                                          const StepMapping& mapping, const CorrelationParams& params,
                                          TimeRange range) {
    std::vector<Alert> alerts;
    alerts.reserve(records.size());
    for (const auto& r : records) alerts.push_back(r.alert);
    auto issues = validate_alerts(alerts, env, mapping, range);

    std::map<std::uint64_t, std::vector<const DatasetRecord*>> clusters;
    for (const auto& r : records) {
        const std::string who = "alert " + std::to_string(r.alert.alert_id) + ": ";
        if (r.corr_final < 0 || r.corr_final > 4) issues.push_back(who + "corr_final outside 0..4");
        if (r.label != label_for(r.corr_final)) issues.push_back(who + "label does not follow corr_final");
        if (r.cluster_id)
            clusters[*r.cluster_id].push_back(&r);
        else if (r.corr_final != 0)
            issues.push_back(who + "unclustered alert with corr_final > 0");
    }

    for (const auto& [id, members] : clusters) {
        const std::string who = "cluster " + std::to_string(id) + ": ";
        std::vector<const Alert*> ptrs;
        for (const auto* r : members) ptrs.push_back(&r->alert);
        for (const auto& v : cluster_rule_violations(ptrs, mapping, params.delta_t)) issues.push_back(who + v);
        if (ptrs.size() >= 2 && average_similarity(ptrs, params) < params.tau)
            issues.push_back(who + "average similarity below tau");
        const bool consistent = std::all_of(members.begin(), members.end(), [&](const DatasetRecord* r) {
            return r->corr_final == members.front()->corr_final;
        });
        if (!consistent) {
            issues.push_back(who + "members disagree on corr_final");
            continue;
        }
        try {
            const auto expected = correlation_index(ptrs, mapping, params.mode);
            if (expected.corr_final != members.front()->corr_final)
                issues.push_back(who + "corr_final " + std::to_string(members.front()->corr_final) + " but hosts give " +
                                 std::to_string(expected.corr_final));
        } catch (const ContractViolation& e) {
            issues.push_back(who + e.what());
        }
    }
    return issues;
}

RunSummary run_all(const RunConfig& cfg) {
    const auto env = build_environment(cfg);
    const auto mapping = resolve_mapping(cfg);
    RunSummary s;
    s.raw = cfg.out_dir / kRawFile;
    s.dataset = cfg.out_dir / kDatasetFile;
    s.preprocessed = cfg.out_dir / kPreprocessedFile;
    s.report_dir = cfg.out_dir / kReportDir;

    const auto generated = assemble_dataset(cfg, env, mapping);
    write_alerts(s.raw, generated.alerts);

    const auto records = correlate_alerts(generated.alerts, cfg, mapping);
    write_dataset(s.dataset, records);
    s.rows = records.size();
    if (records.empty()) return s;

    write_preprocessed(s.preprocessed, preprocess(records));
    s.report = summarize(records);
    s.clusters = s.report.clusters;
    write_report(s.report_dir, s.report);
    return s;
}

}  // namespace aptsynth
