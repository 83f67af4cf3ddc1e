// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "aptsynth/alert_rules.hpp"
#include "aptsynth/correlation.hpp"
#include "aptsynth/dataset.hpp"
#include "aptsynth/noise_generator.hpp"
#include "aptsynth/pipeline.hpp"
#include "aptsynth/scenario_generator.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace aptsynth;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            detail << " [violated: " << what << "]";
        }
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<const Alert*> pointers(std::span<const Alert> v) {
    std::vector<const Alert*> p;
    for (const auto& a : v) p.push_back(&a);
    return p;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("aptsynth_acceptance_" + name);
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

// corr_final each chain shape must score, worked out by hand from the host
// chain rules with every alert on one infected host.
int expected_corr(const std::string& shape, CorrelationMode mode) {
    static const std::map<std::string, int> strict{{"ABCDE", 4}, {"ABCD", 3}, {"BCDE", 3}, {"ABC", 2}, {"BCD", 2},
                                                   {"ABE", 1},   {"AB", 1},   {"BC", 1},   {"CD", 1},  {"DE", 1}};
    if (mode == CorrelationMode::extended && shape == "ABE") return 2;
    return strict.at(shape);
}

bool supported(const ScenarioShape& shape, const StepMapping& mapping) {
    for (auto s : shape.ordered_steps())
        if (mapping.types_of(s).empty()) return false;
    return true;
}

// Hosts drawn from campus without repeats.
class HostDraw {
public:
    HostDraw(const NetworkEnvironment& env, Rng& rng) : env_(env), rng_(rng) {}
    Ipv4 next() {
        for (;;) {
            Ipv4 h = env_.sample(AddressClass::campus, rng_);
            if (used_.insert(h).second) return h;
        }
    }
    bool used(Ipv4 h) const { return used_.contains(h); }

private:
    const NetworkEnvironment& env_;
    Rng& rng_;
    std::unordered_set<Ipv4> used_;
};

// ---------------------------------------------------------------------------

Verdict worked_examples() {
    Verdict v;
    const Ipv4 h = fixtures::campus_host(40);
    const EpochSeconds t = fixtures::kT0;

    const auto m1 = scan_entry_mapping();
    const std::vector<Alert> ex1{fixtures::alert(1, AlertType::scan_alert, t, h, m1),
                                 fixtures::alert(2, AlertType::phishing_alert, t + 2 * kHour, h, m1),
                                 fixtures::alert(3, AlertType::tor_alert, t + 6 * kHour, h, m1),
                                 fixtures::alert(4, AlertType::data_exfiltration_alert, t + 12 * kHour, h, m1)};
    const auto m2 = hash_escalation_mapping();
    const std::vector<Alert> ex2{fixtures::alert(1, AlertType::malware_download_alert, t, h, m2),
                                 fixtures::alert(2, AlertType::hash_alert, t + 2 * kHour, h, m2),
                                 fixtures::alert(3, AlertType::network_intrusion_alert, t + 6 * kHour, h, m2),
                                 fixtures::alert(4, AlertType::data_exfiltration_alert, t + 12 * kHour, h, m2)};

    struct Case {
        const char* name;
        const std::vector<Alert>& alerts;
        const StepMapping& mapping;
        int corr;
        ScenarioLabel label;
    };
    for (const Case& c : {Case{"example 1", ex1, m1, 2, ScenarioLabel::three_steps},
                          Case{"example 2", ex2, m2, 3, ScenarioLabel::full}}) {
        const auto direct = correlation_index(pointers(c.alerts), c.mapping, CorrelationMode::strict);
        v.require(direct.corr_final == c.corr, std::string(c.name) + " corr_final");
        v.require(direct.label == c.label, std::string(c.name) + " label");
        v.require(oracle::corr_final(pointers(c.alerts), c.mapping, true) == c.corr, std::string(c.name) + " oracle");
        const auto out = correlate(c.alerts, CorrelationParams{}, c.mapping);
        v.require(out.clusters.size() == 1 && out.clusters[0].alert_ids.size() == 4 &&
                      out.results[0].corr_final == c.corr,
                  std::string(c.name) + " through correlate");
        v.detail << ' ' << c.name << " corr_final=" << direct.corr_final << " label=" << label_name(direct.label);
    }
    return v;
}

struct FullScale {
    RunSummary summary;
    double seconds = 0.0;
};

Verdict table_reproduction(const FullScale& run) {
    Verdict v;
    const auto& r = run.summary.report;
    v.require(run.summary.rows == 120000, "120000 rows");
    v.require(r.apt == 48000 && r.non_apt == 72000, "60/40 split");
    v.require(run.seconds <= 300.0, "end to end within 5 minutes");

    const auto records = read_dataset(run.summary.dataset);
    const auto null_campaign = std::count_if(records.begin(), records.end(),
                                             [](const DatasetRecord& d) { return !d.alert.campaign_id; });
    v.require(records.size() == 120000, "dataset file rows");
    v.require(null_campaign == 72000, "72000 null-campaign rows");

    std::ifstream pre(run.summary.preprocessed);
    std::vector<std::string> header, row;
    std::size_t line = 0, rows = 0;
    read_csv_record(pre, header, line);
    bool widths_ok = true;
    while (read_csv_record(pre, row, line)) {
        ++rows;
        widths_ok = widths_ok && row.size() == kFeatureCount + 1;
    }
    const std::size_t width = header.empty() ? 0 : header.size() - 1;  // last column is the label
    v.require(width == 31 && header.back() == "label" && widths_ok, "preprocessed width 31 plus label");
    v.require(rows == 120000, "preprocessed rows");
    v.detail << " rows=" << run.summary.rows << " apt=" << r.apt << " non_apt=" << r.non_apt
             << " null_campaign=" << null_campaign << " features=" << width << " seconds=" << run.seconds;
    return v;
}

Verdict type_marginals(const DatasetReport& full, const DatasetReport& desk) {
    Verdict v;
    const std::pair<AlertType, double> top[] = {{AlertType::scan_alert, 12.9},
                                                {AlertType::tor_alert, 10.6},
                                                {AlertType::data_exfiltration_alert, 7.7},
                                                {AlertType::kernel_exploit_attempt_alert, 7.6},
                                                {AlertType::network_intrusion_alert, 7.5}};
    for (auto [type, target] : top) {
        const double at_full = full.type_percentage(type);
        const double at_desk = desk.type_percentage(type);
        v.require(std::fabs(at_full - target) <= 1.0, std::string(alert_type_name(type)) + " at 120k");
        v.require(std::fabs(at_desk - target) <= 2.0, std::string(alert_type_name(type)) + " at 12k");
        v.detail << ' ' << alert_type_name(type) << '=' << at_full << '/' << at_desk;
    }
    return v;
}

Verdict campaign_statistics(const DatasetReport& r) {
    Verdict v;
    v.require(r.campaigns >= 2000, "at least 2000 campaigns");
    v.require(std::fabs(r.campaign_mean_length - 19.66) <= 0.5, "mean length 19.66 +- 0.5");
    v.require(r.campaign_max_length <= 30, "max length <= 30");
    v.detail << " campaigns=" << r.campaigns << " mean=" << r.campaign_mean_length
             << " max=" << r.campaign_max_length;
    return v;
}

Verdict zero_false_apt() {
    Verdict v;
    const auto mapping = canonical_mapping();
    const CorrelationParams params;
    std::size_t bad = 0, clusters = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto env = NetworkEnvironment::make_default(seed);
        const auto noise = generate_noise_batch(10000, env, mapping, NoiseConfig{}, params, seed);
        const auto out = correlate(noise, params, mapping);
        clusters += out.clusters.size();
        bad += std::count_if(out.results.begin(), out.results.end(),
                             [](const CorrelationResult& r) { return r.label != ScenarioLabel::non_apt; });
    }
    v.require(bad == 0, "no cluster labelled other than Non-APT");
    v.detail << " seeds=20 alerts_per_seed=10000 clusters=" << clusters << " non_non_apt=" << bad;
    return v;
}

struct Recovery {
    std::size_t injected = 0;
    std::size_t recovered = 0;
};

// 50 scenarios (five of each shape) on distinct hosts inside a 60-day span,
// optionally with noise at the default density of the full dataset.
Recovery recover_scenarios(std::uint64_t seed, bool with_noise, CorrelationMode mode) {
    const auto env = NetworkEnvironment::make_default(seed);
    const auto mapping = canonical_mapping();
    CorrelationParams params;
    params.mode = mode;
    const TimeRange span{kDefaultTimeRange.begin, kDefaultTimeRange.begin + 60 * kDay};

    Rng rng(derive_seed(seed, StreamTag::test, 6));
    HostDraw hosts(env, rng);
    std::vector<Alert> alerts;
    std::vector<std::pair<std::set<std::uint64_t>, int>> expected;
    for (int s = 0; s < 50; ++s) {
        const auto& shape = enumerate_shapes()[std::size_t(s) % kShapeCount];
        const EpochSeconds start = uniform_int<EpochSeconds>(rng, span.begin, span.end - params.delta_t);
        ScenarioRequest req{shape, start, hosts.next(), std::uint64_t(s + 1), "C" + std::to_string(s + 1)};
        auto chain = generate_scenario(req, mapping, env, params.delta_t, rng);
        std::set<std::uint64_t> ids;
        for (auto& a : chain) {
            a.alert_id = alerts.size() + 1;
            ids.insert(a.alert_id);
            alerts.push_back(a);
        }
        expected.emplace_back(ids, expected_corr(shape.name(), mode));
    }
    if (with_noise) {
        NoiseConfig cfg;
        cfg.time_range = span;
        const double per_day = 72000.0 / double(kDefaultTimeRange.length()) * double(kDay);
        const auto count = static_cast<std::size_t>(std::lround(per_day * 60.0));
        const auto noise = generate_noise_batch(count, env, mapping, cfg, params, seed, alerts.size() + 1, alerts);
        alerts.insert(alerts.end(), noise.begin(), noise.end());
    }
    const auto out = correlate(alerts, params, mapping);
    std::map<std::set<std::uint64_t>, int> found;
    for (std::size_t i = 0; i < out.clusters.size(); ++i)
        found[{out.clusters[i].alert_ids.begin(), out.clusters[i].alert_ids.end()}] = out.results[i].corr_final;
    Recovery r;
    for (const auto& [ids, corr] : expected) {
        ++r.injected;
        auto it = found.find(ids);
        if (it != found.end() && label_for(it->second) == label_for(corr)) ++r.recovered;
    }
    return r;
}

Verdict scenario_recovery() {
    Verdict v;
    Recovery noisy, clean, clean_ext;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto a = recover_scenarios(seed, true, CorrelationMode::strict);
        auto b = recover_scenarios(seed, false, CorrelationMode::strict);
        auto c = recover_scenarios(seed, false, CorrelationMode::extended);
        noisy.injected += a.injected;
        noisy.recovered += a.recovered;
        clean.injected += b.injected;
        clean.recovered += b.recovered;
        clean_ext.injected += c.injected;
        clean_ext.recovered += c.recovered;
    }
    const double rate = double(noisy.recovered) / double(noisy.injected);
    v.require(rate >= 0.95, ">= 95% with noise");
    v.require(clean.recovered == clean.injected, "100% without noise");
    v.require(clean_ext.recovered == clean_ext.injected, "100% without noise, extended mode");
    v.detail << " with_noise=" << noisy.recovered << '/' << noisy.injected << " without_noise=" << clean.recovered
             << '/' << clean.injected << " extended_without_noise=" << clean_ext.recovered << '/'
             << clean_ext.injected;
    return v;
}

Verdict oracle_equivalence() {
    Verdict v;
    const StepMapping mappings[] = {canonical_mapping(), scan_entry_mapping(), hash_escalation_mapping()};
    std::size_t compared_clusters = 0, scenario_alerts = 0, mismatches = 0, largest = 0;
    for (int w = 0; w < 50; ++w) {
        const StepMapping& mapping = mappings[std::size_t(w) % 3];
        CorrelationParams p;
        p.mode = w % 2 ? CorrelationMode::extended : CorrelationMode::strict;
        const auto env = NetworkEnvironment::make_default(std::uint64_t(w) + 100);
        Rng rng(derive_seed(std::uint64_t(w), StreamTag::test, 7));
        const EpochSeconds begin = kDefaultTimeRange.begin + EpochSeconds(w) * 3 * kDay;
        const TimeRange window{begin, begin + p.delta_t};
        HostDraw hosts(env, rng);

        std::vector<Alert> alerts;
        std::unordered_set<std::uint64_t> scenario_ids;
        const int scenarios = uniform_int(rng, 3, 30);
        for (int s = 0; s < scenarios; ++s) {
            const auto& shape = enumerate_shapes()[uniform_int<std::size_t>(rng, 0, kShapeCount - 1)];
            if (!supported(shape, mapping)) continue;  // scan-entry leaves step D empty
            // Some chains start before or run past the window and arrive truncated.
            const EpochSeconds start = uniform_int<EpochSeconds>(rng, begin - p.delta_t / 3, window.end);
            auto chain = generate_scenario({shape, start, hosts.next(), std::uint64_t(s + 1)}, mapping, env,
                                           p.delta_t, rng);
            for (auto& a : chain) {
                if (a.timestamp < window.begin || a.timestamp >= window.end) continue;
                a.alert_id = alerts.size() + 1;
                scenario_ids.insert(a.alert_id);
                alerts.push_back(a);
            }
        }
        NoiseConfig cfg;
        cfg.time_range = {window.begin, window.end - 1};
        const int noise = uniform_int(rng, 0, 200 - int(alerts.size()));
        for (int i = 0; i < noise; ++i) {
            Alert a = generate_noise_alert(env, mapping, cfg, rng);
            if (hosts.used(a.src_ip)) continue;  // keep noise off scenario hosts
            a.alert_id = alerts.size() + 1;
            alerts.push_back(a);
        }
        std::sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
            return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.alert_id < b.alert_id;
        });
        largest = std::max(largest, alerts.size());
        scenario_alerts += scenario_ids.size();

        auto restrict = [&](const std::set<std::uint64_t>& ids) {
            std::set<std::uint64_t> out;
            for (auto id : ids)
                if (scenario_ids.contains(id)) out.insert(id);
            return out;
        };
        std::vector<oracle::Group> got, want;
        const AlertIndex index(alerts);
        for (const auto& c : cluster_window(alerts, window, p, mapping)) {
            auto ids = restrict({c.alert_ids.begin(), c.alert_ids.end()});
            if (ids.empty()) continue;
            got.push_back({ids, correlation_index(c, index, mapping, p.mode).corr_final});
        }
        for (const auto& g : oracle::reference_clusters(alerts, window.begin, p.delta_t, p.tau, mapping,
                                                        p.mode == CorrelationMode::strict)) {
            auto ids = restrict(g.ids);
            if (ids.empty()) continue;
            want.push_back({ids, g.corr_final});
        }
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        compared_clusters += want.size();
        if (got != want) ++mismatches;
    }
    v.require(mismatches == 0, "all windows match the reference");
    v.detail << " windows=50 mismatched=" << mismatches << " reference_clusters=" << compared_clusters
             << " scenario_alerts=" << scenario_alerts << " largest_window=" << largest;
    return v;
}

Verdict determinism(const RunSummary& one_thread) {
    Verdict v;
    RunConfig cfg;
    cfg.noise_count = 7200;
    cfg.apt_count = 4800;
    cfg.correlation.threads = 4;
    cfg.out_dir = scratch("desk_threads4");
    const auto four = run_all(cfg);
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(one_thread.raw.parent_path())) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), one_thread.raw.parent_path());
        ++files;
        v.require(fs::exists(cfg.out_dir / rel) && slurp(entry.path()) == slurp(cfg.out_dir / rel),
                  rel.string() + " identical");
    }
    v.require(files >= 14, "every output compared");
    v.detail << " files_compared=" << files << " threads=1 vs 4";
    return v;
}

Verdict performance(const FullScale& run) {
    Verdict v;
    const auto alerts = read_alerts(run.summary.raw);
    const auto mapping = canonical_mapping();
    CorrelationParams p;
    p.threads = 1;
    const auto t0 = Clock::now();
    const auto out = correlate(alerts, p, mapping);
    const double full = seconds_since(t0);
    v.require(full <= 60.0, "120k correlate within 60 s");

    // Per-window cost at growing window sizes: noise plus one scenario per
    // 25 alerts, all inside one window.
    const auto env = NetworkEnvironment::make_default(9);
    const TimeRange window{kDefaultTimeRange.begin, kDefaultTimeRange.begin + p.delta_t};
    NoiseConfig cfg;
    cfg.time_range = {window.begin, window.end - 1};
    std::vector<double> xs, ys;
    std::size_t window_clusters = 0;
    for (std::size_t n : {1000, 2000, 4000, 8000}) {
        Rng rng(derive_seed(n, StreamTag::test, 9));
        std::vector<Alert> w;
        while (w.size() < n / 5) {
            auto chain = generate_scenario({enumerate_shapes()[0], window.begin + uniform_int<EpochSeconds>(rng, 0, p.delta_t / 4)},
                                           mapping, env, p.delta_t, rng);
            for (auto& a : chain) w.push_back(a);
        }
        while (w.size() < n) w.push_back(generate_noise_alert(env, mapping, cfg, rng));
        w.resize(n);
        for (std::size_t i = 0; i < w.size(); ++i) w[i].alert_id = i + 1;
        std::sort(w.begin(), w.end(), [](const Alert& a, const Alert& b) {
            return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.alert_id < b.alert_id;
        });
        double best = 1e9;
        for (int rep = 0; rep < 5; ++rep) {
            const auto t = Clock::now();
            window_clusters += cluster_window(w, window, p, mapping).size();
            best = std::min(best, seconds_since(t));
        }
        xs.push_back(std::log(double(n)));
        ys.push_back(std::log(best));
        v.detail << " n" << n << '=' << best * 1e3 << "ms";
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / double(ys.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double exponent = sxy / sxx;
    v.require(exponent < 1.7, "fitted exponent < 1.7");
    v.detail << " correlate_120k=" << full << "s clusters=" << out.clusters.size() << " window_clusters=" << window_clusters
             << " exponent=" << exponent;
    return v;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Verdict()>& check) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << " exception: " << e.what();
        }
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ' ' << name << ':' << v.detail.str()
                  << std::endl;
        if (!v.pass) ++failures;
    };

    FullScale full;
    RunSummary desk;
    try {
        RunConfig cfg;
        cfg.out_dir = scratch("full");
        const auto t0 = Clock::now();
        full.summary = run_all(cfg);
        full.seconds = seconds_since(t0);

        RunConfig small;
        small.noise_count = 7200;
        small.apt_count = 4800;
        small.correlation.threads = 1;
        small.out_dir = scratch("desk_threads1");
        desk = run_all(small);
    } catch (const std::exception& e) {
        std::cout << "setup failed: " << e.what() << std::endl;
    }

    report(1, "worked-example fidelity", worked_examples);
    report(2, "full-scale dataset shape", [&] { return table_reproduction(full); });
    report(3, "alert-type marginals", [&] { return type_marginals(full.summary.report, desk.report); });
    report(4, "campaign statistics", [&] { return campaign_statistics(full.summary.report); });
    report(5, "zero false APT on noise", zero_false_apt);
    report(6, "scenario recovery", scenario_recovery);
    report(7, "oracle equivalence", oracle_equivalence);
    report(8, "thread-count determinism", [&] { return determinism(desk); });
    report(9, "correlation performance", [&] { return performance(full); });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
