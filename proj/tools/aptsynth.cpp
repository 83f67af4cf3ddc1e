// aptsynth command-line tool over the generation and correlation pipeline.
// Run `aptsynth --help` for the command list.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aptsynth/config.hpp"
#include "aptsynth/error.hpp"
#include "aptsynth/pipeline.hpp"

namespace fs = std::filesystem;
using namespace aptsynth;

namespace {

enum ExitCode : int {
    kOk = 0,
    kConfig = 2,
    kGenerate = 3,
    kCorrelate = 4,
    kPreprocess = 5,
    kReport = 6,
    kValidate = 7,
    kIo = 8,
};

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> noise_count;
    std::optional<std::size_t> apt_count;
    std::optional<double> tau;
    std::optional<double> delta_t_hours;
    std::optional<double> slide_hours;
    std::optional<int> k_cap;
    std::optional<std::string> mode;
    std::optional<unsigned> threads;
    std::optional<std::string> out_dir;
    std::optional<std::string> mapping;
    std::string input;
    std::string output;
};

int fail(int code, std::string_view stage, std::string_view type, std::string_view message) {
    nlohmann::ordered_json j;
    j["error"] = {{"stage", stage}, {"code", code}, {"type", type}, {"message", message}};
    std::cerr << j.dump() << std::endl;
    return code;
}

RunConfig resolve_config(const Overrides& o) {
    RunConfig cfg;
    std::string path = o.config;
    if (path.empty())
        if (const char* env = std::getenv(kConfigEnvVar)) path = env;
    if (!path.empty()) cfg = load_config(path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.noise_count) cfg.noise_count = *o.noise_count;
    if (o.apt_count) cfg.apt_count = *o.apt_count;
    if (o.tau) cfg.correlation.tau = *o.tau;
    if (o.delta_t_hours) cfg.correlation.delta_t = static_cast<DurationSeconds>(*o.delta_t_hours * kHour);
    if (o.slide_hours) cfg.correlation.slide = static_cast<DurationSeconds>(*o.slide_hours * kHour);
    if (o.k_cap) cfg.correlation.k_cap = *o.k_cap;
    if (o.mode) {
        auto m = parse_mode(*o.mode);
        if (!m) throw ConfigError("--mode must be 'strict' or 'extended'");
        cfg.correlation.mode = *m;
    }
    if (o.threads) cfg.correlation.threads = *o.threads;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.mapping) cfg.mapping = *o.mapping;
    validate(cfg);
    return cfg;
}

fs::path pick(const std::string& flag, const fs::path& fallback) { return flag.empty() ? fallback : fs::path(flag); }

void print_summary(const nlohmann::ordered_json& j) { std::cout << j.dump() << std::endl; }

bool has_correlation_columns(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::string header;
    std::getline(in, header);
    return header.find("cluster_id") != std::string::npos;
}

int run_validate(const RunConfig& cfg, const fs::path& input) {
    const auto env = build_environment(cfg);
    const auto mapping = resolve_mapping(cfg);
    std::vector<std::string> issues;
    std::size_t rows = 0;
    if (has_correlation_columns(input)) {
        const auto records = read_dataset(input);
        rows = records.size();
        issues = validate_records(records, env, mapping, cfg.correlation, cfg.noise.time_range);
    } else {
        const auto alerts = read_alerts(input);
        rows = alerts.size();
        issues = validate_alerts(alerts, env, mapping, cfg.noise.time_range);
    }
    nlohmann::ordered_json j;
    j["input"] = input.string();
    j["rows"] = rows;
    j["violations"] = issues.size();
    if (issues.empty()) {
        j["status"] = "ok";
        print_summary(j);
        return kOk;
    }
    constexpr std::size_t kShown = 20;
    std::vector<std::string> shown(issues.begin(), issues.begin() + static_cast<std::ptrdiff_t>(std::min(kShown, issues.size())));
    j["status"] = "invalid";
    j["first_violations"] = shown;
    std::cerr << nlohmann::ordered_json{{"error", {{"stage", "validate"}, {"code", kValidate}, {"type", "InvariantViolation"},
                                                   {"message", std::to_string(issues.size()) + " invariant violations"},
                                                   {"details", j}}}}
                     .dump()
              << std::endl;
    return kValidate;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic APT alert dataset generator and correlation engine"};
    app.require_subcommand(1);
    Overrides o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON config file (default: $" + std::string(kConfigEnvVar) + ")");
        sub->add_option("--seed", o.seed, "RNG seed");
        sub->add_option("--noise-count", o.noise_count, "number of noise alerts");
        sub->add_option("--apt-count", o.apt_count, "number of campaign alerts");
        sub->add_option("--tau", o.tau, "similarity threshold");
        sub->add_option("--delta-t-hours", o.delta_t_hours, "correlation window length in hours");
        sub->add_option("--slide-hours", o.slide_hours, "window slide in hours");
        sub->add_option("--k-cap", o.k_cap, "upper bound on k");
        sub->add_option("--mode", o.mode, "strict or extended")->check(CLI::IsMember({"strict", "extended"}));
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out-dir", o.out_dir, "output directory");
        sub->add_option("--mapping", o.mapping, "canonical, scan-entry, hash-escalation or a mapping file");
    };
    auto* gen = app.add_subcommand("generate", "write the raw alert CSV");
    auto* cor = app.add_subcommand("correlate", "append cluster_id, corr_final and label");
    auto* pre = app.add_subcommand("preprocess", "write the 31-feature matrix");
    auto* rep = app.add_subcommand("report", "write report.json and per-figure CSVs");
    auto* val = app.add_subcommand("validate", "check dataset invariants; nonzero exit on violation");
    auto* all = app.add_subcommand("all", "generate, correlate, preprocess and report");
    for (auto* sub : {gen, cor, pre, rep, val, all}) common(sub);
    for (auto* sub : {cor, pre, rep, val}) sub->add_option("--input", o.input, "input CSV");
    for (auto* sub : {gen, cor, pre, rep}) sub->add_option("--output", o.output, "output file or directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kConfig, "cli", "UsageError", e.what());
    }

    std::string stage = "config";
    int stage_code = kConfig;
    try {
        const RunConfig cfg = resolve_config(o);
        const fs::path dir = cfg.out_dir;

        if (*gen) {
            stage = "generate", stage_code = kGenerate;
            const auto env = build_environment(cfg);
            const auto mapping = resolve_mapping(cfg);
            const auto data = assemble_dataset(cfg, env, mapping);
            const auto out = pick(o.output, dir / kRawFile);
            write_alerts(out, data.alerts);
            print_summary({{"command", "generate"}, {"output", out.string()}, {"rows", data.alerts.size()},
                           {"campaigns", data.campaigns.size()}});
        } else if (*cor) {
            stage = "correlate", stage_code = kCorrelate;
            const auto mapping = resolve_mapping(cfg);
            const auto alerts = read_alerts(pick(o.input, dir / kRawFile));
            const auto records = correlate_alerts(alerts, cfg, mapping);
            const auto out = pick(o.output, dir / kDatasetFile);
            write_dataset(out, records);
            std::size_t clustered = 0;
            for (const auto& r : records) clustered += r.cluster_id.has_value();
            print_summary({{"command", "correlate"}, {"output", out.string()}, {"rows", records.size()},
                           {"clustered_alerts", clustered}});
        } else if (*pre) {
            stage = "preprocess", stage_code = kPreprocess;
            const auto records = read_dataset(pick(o.input, dir / kDatasetFile));
            const auto table = preprocess(records);
            const auto out = pick(o.output, dir / kPreprocessedFile);
            write_preprocessed(out, table);
            print_summary({{"command", "preprocess"}, {"output", out.string()}, {"rows", table.rows.size()},
                           {"features", table.feature_columns.size()}});
        } else if (*rep) {
            stage = "report", stage_code = kReport;
            const auto records = read_dataset(pick(o.input, dir / kDatasetFile));
            const auto report = summarize(records);
            const auto out = pick(o.output, dir / kReportDir);
            write_report(out, report);
            print_summary({{"command", "report"}, {"output", out.string()}, {"rows", report.total}});
        } else if (*val) {
            stage = "validate", stage_code = kValidate;
            return run_validate(cfg, pick(o.input, dir / kDatasetFile));
        } else if (*all) {
            stage = "all", stage_code = kGenerate;
            const auto s = run_all(cfg);
            print_summary({{"command", "all"},
                           {"raw", s.raw.string()},
                           {"dataset", s.dataset.string()},
                           {"preprocessed", s.preprocessed.string()},
                           {"report", s.report_dir.string()},
                           {"rows", s.rows},
                           {"clusters", s.clusters}});
        }
        return kOk;
    } catch (const ConfigError& e) {
        return fail(kConfig, stage, "ConfigError", e.what());
    } catch (const TaxonomyError& e) {
        return fail(kConfig, stage, "TaxonomyError", e.what());
    } catch (const IoError& e) {
        return fail(kIo, stage, "IoError", e.what());
    } catch (const ParseError& e) {
        return fail(kIo, stage, "ParseError", e.what());
    } catch (const GenerationError& e) {
        return fail(kGenerate, stage, "GenerationError", e.what());
    } catch (const PipelineError& e) {
        return fail(stage_code, stage, "PipelineError", e.what());
    } catch (const Error& e) {
        return fail(stage_code, stage, "Error", e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(kIo, stage, "IoError", e.what());
    } catch (const std::exception& e) {
        return fail(stage_code, stage, "InternalError", e.what());
    }
}
