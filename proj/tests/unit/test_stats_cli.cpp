#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aptsynth/config.hpp"
#include "aptsynth/error.hpp"
#include "aptsynth/pipeline.hpp"
#include "aptsynth/report.hpp"

using namespace aptsynth;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const fs::path& dir) {
    RunConfig cfg;
    cfg.seed = 11;
    cfg.noise_count = 1800;
    cfg.apt_count = 1200;
    cfg.out_dir = dir;
    return cfg;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("aptsynth_unit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config defaults") {
    const RunConfig cfg;
    CHECK(cfg.seed == 42);
    CHECK(cfg.noise_count == 72000);
    CHECK(cfg.apt_count == 48000);
    CHECK(cfg.total() == 120000);
    CHECK(cfg.correlation.tau == 0.6);
    CHECK(cfg.correlation.delta_t == 168 * kHour);
    CHECK(cfg.correlation.slide == 84 * kHour);
    CHECK(cfg.correlation.k_cap == 14);
    CHECK(cfg.correlation.mode == CorrelationMode::strict);
}

TEST_CASE("config parsing is strict") {
    CHECK_THROWS_AS(config_from_json(R"({"sed": 1})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"totals": {"noise": 1}})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"seed": "x"})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"correlation": {"tau": 2.0}})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"correlation": {"mode": "loose"}})"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"noise": {"type_weights": {"ufo_alert": 1}}})"), Error);
    const auto cfg = config_from_json(R"({"seed": 7, "totals": {"noise_count": 10, "apt_count": 20},
                                         "correlation": {"tau": 0.7, "delta_t_hours": 24, "slide_hours": 12,
                                                         "mode": "extended"}})");
    CHECK(cfg.seed == 7);
    CHECK(cfg.total() == 30);
    CHECK(cfg.correlation.tau == 0.7);
    CHECK(cfg.correlation.delta_t == 24 * kHour);
    CHECK(cfg.correlation.slide == 12 * kHour);
    CHECK(cfg.correlation.mode == CorrelationMode::extended);
}

TEST_CASE("config JSON round-trip") {
    RunConfig cfg = config_from_json(R"({"seed": 99, "mapping": "hash-escalation",
                                        "environment": {"tor_exit_nodes": ["203.0.113.7", "203.0.113.8"]},
                                        "noise": {"retry_bound": 4}})");
    const auto text = config_to_json(cfg);
    const auto back = config_from_json(text);
    CHECK(config_to_json(back) == text);
    CHECK(back.seed == 99);
    CHECK(resolve_mapping(back) == hash_escalation_mapping());
    CHECK(build_environment(back).spec().tor_exit_nodes.size() == 2);
    CHECK(back.noise.retry_bound == 4);
}

TEST_CASE("inline mapping") {
    RunConfig cfg;
    cfg.mapping = hash_escalation_mapping().to_json_text();
    CHECK(resolve_mapping(cfg) == hash_escalation_mapping());
}

TEST_CASE("small run reconciles its totals and passes validation") {
    const auto dir = scratch("run");
    const RunConfig cfg = small_config(dir);
    const auto summary = run_all(cfg);
    CHECK(summary.rows == 3000);
    const auto& r = summary.report;
    CHECK(r.total == 3000);
    CHECK(r.apt == 1200);
    CHECK(r.non_apt == 1800);
    CHECK(std::accumulate(r.per_type.begin(), r.per_type.end(), std::size_t{0}) == r.total);
    CHECK(std::accumulate(r.per_step.begin(), r.per_step.end(), std::size_t{0}) == r.total);
    CHECK(std::accumulate(r.per_step_campaign.begin(), r.per_step_campaign.end(), std::size_t{0}) == r.apt);
    CHECK(std::accumulate(r.hourly.begin(), r.hourly.end(), std::size_t{0}) == r.total);
    CHECK(std::accumulate(r.weekday.begin(), r.weekday.end(), std::size_t{0}) == r.total);
    CHECK(std::accumulate(r.labels.begin(), r.labels.end(), std::size_t{0}) == r.total);
    CHECK(std::accumulate(r.cluster_labels.begin(), r.cluster_labels.end(), std::size_t{0}) == r.clusters);
    std::size_t daily = 0;
    for (const auto& [day, c] : r.daily) daily += c.apt + c.non_apt;
    CHECK(daily == r.total);
    std::size_t span_alerts = 0;
    for (const auto& s : r.campaign_spans) span_alerts += s.alerts;
    CHECK(span_alerts == r.apt);
    CHECK(r.campaign_max_length <= 30);

    const auto records = read_dataset(summary.dataset);
    const auto env = build_environment(cfg);
    const auto mapping = resolve_mapping(cfg);
    const auto problems = validate_records(records, env, mapping, cfg.correlation, cfg.noise.time_range);
    CHECK(problems.empty());
    for (const auto& p : problems) MESSAGE(p);

    for (const auto& name : figure_files()) CHECK(fs::exists(summary.report_dir / name));
    const auto doc = nlohmann::json::parse(slurp(summary.report_dir / "report.json"));
    CHECK(doc.at("total_records") == 3000);
    CHECK(doc.at("apt_records") == 1200);
}

TEST_CASE("summarizing a re-read dataset gives the same report") {
    const auto dir = scratch("reread");
    const auto summary = run_all(small_config(dir));
    const auto records = read_dataset(summary.dataset);
    const auto again = summarize(records);
    CHECK(again == summary.report);
    CHECK(report_json(again) == report_json(summary.report));
    const auto second = dir / "second";
    write_report(second, again);
    for (const auto& name : figure_files()) CHECK(slurp(second / name) == slurp(summary.report_dir / name));
    CHECK(slurp(second / "report.json") == slurp(summary.report_dir / "report.json"));
}

TEST_CASE("validation flags corrupted rows") {
    const auto dir = scratch("corrupt");
    const RunConfig cfg = small_config(dir);
    const auto summary = run_all(cfg);
    auto records = read_dataset(summary.dataset);
    auto it = std::find_if(records.begin(), records.end(),
                           [](const DatasetRecord& r) { return r.alert.alert_type == AlertType::scan_alert; });
    REQUIRE(it != records.end());
    it->alert.scanned_host.reset();
    const auto problems =
        validate_records(records, build_environment(cfg), resolve_mapping(cfg), cfg.correlation, cfg.noise.time_range);
    CHECK_FALSE(problems.empty());
}

TEST_CASE("empty input is a pipeline error") {
    CHECK_THROWS_AS(summarize({}), PipelineError);
}
