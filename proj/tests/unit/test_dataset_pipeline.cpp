#include <doctest.h>

#include <sstream>

#include "aptsynth/dataset.hpp"
#include "aptsynth/error.hpp"
#include "aptsynth/noise_generator.hpp"
#include "aptsynth/scenario_generator.hpp"
#include "fixtures.hpp"

using namespace aptsynth;

namespace {

std::vector<DatasetRecord> sample_records(std::size_t n, std::uint64_t seed) {
    const auto env = NetworkEnvironment::make_default(seed);
    const auto m = canonical_mapping();
    const NoiseConfig cfg;
    Rng rng(seed);
    std::vector<DatasetRecord> out;
    const auto campaigns = plan_campaigns(n / 2, {}, env, m, 168 * kHour, kDefaultTimeRange, seed);
    std::uint64_t id = 1;
    for (const auto& c : campaigns)
        for (auto a : c.alerts) {
            a.alert_id = id++;
            out.push_back({a, id % 7 + 1, int(id % 5), label_for(int(id % 5))});
        }
    while (out.size() < n) {
        auto a = generate_noise_alert(env, m, cfg, rng);
        a.alert_id = id++;
        out.push_back({a, std::nullopt, 0, ScenarioLabel::non_apt});
    }
    return out;
}

}  // namespace

TEST_CASE("dataset CSV round-trip") {
    const auto records = sample_records(1000, 3);
    std::stringstream buf;
    write_dataset(buf, records);
    const auto back = read_dataset(buf);
    CHECK(back == records);

    std::vector<Alert> alerts;
    for (const auto& r : records) alerts.push_back(r.alert);
    std::stringstream raw;
    write_alerts(raw, alerts);
    CHECK(read_alerts(raw) == alerts);
}

TEST_CASE("header and empty cells") {
    const auto records = sample_records(20, 4);
    std::stringstream buf;
    write_dataset(buf, records);
    std::string header;
    std::getline(buf, header);
    CHECK(header ==
          "alert_id,alert_type,timestamp,src_ip,src_port,dest_ip,dest_port,infected_host,scanned_host,campaign_id,step,"
          "ground_truth,cluster_id,corr_final,label");
    std::vector<std::string> cells;
    std::size_t line = 1;
    bool saw_noise = false;
    while (read_csv_record(buf, cells, line)) {
        REQUIRE(cells.size() == 15);
        if (cells[11] != "noise") continue;
        saw_noise = true;
        CHECK(cells[9].empty());
        CHECK(cells[12].empty());
    }
    CHECK(saw_noise);
}

TEST_CASE("bad rows report their line") {
    const auto records = sample_records(5, 5);
    std::stringstream buf;
    write_dataset(buf, records);
    std::string text = buf.str();
    const auto pos = text.rfind("Non-APT");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 7, "APT-ish");
    std::istringstream in(text);
    try {
        (void)read_dataset(in);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 6);
    }

    std::istringstream bad_type("alert_id,alert_type,timestamp,src_ip,src_port,dest_ip,dest_port,infected_host,"
                                "scanned_host,campaign_id,step,ground_truth\n"
                                "1,ufo_alert,2024-02-01T00:00:00Z,10.20.0.1,50000,203.0.113.10,80,10.20.0.1,,,A,noise\n");
    CHECK_THROWS_AS(read_alerts(bad_type), ParseError);
    std::istringstream bad_header("a,b,c\n");
    CHECK_THROWS_AS(read_alerts(bad_header), ParseError);
}

TEST_CASE("quoted cells") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    std::istringstream in("x,\"a,b\",\"two\nlines\",\"q\"\"q\"\r\nnext\n");
    std::vector<std::string> cells;
    std::size_t line = 0;
    REQUIRE(read_csv_record(in, cells, line));
    CHECK(cells == std::vector<std::string>{"x", "a,b", "two\nlines", "q\"q"});
    REQUIRE(read_csv_record(in, cells, line));
    CHECK(cells == std::vector<std::string>{"next"});
    CHECK(line == 3);
    CHECK_FALSE(read_csv_record(in, cells, line));
}

TEST_CASE("campaign ids with commas survive") {
    auto records = sample_records(4, 6);
    records[0].alert.campaign_id = "C1,\"x\"";
    std::stringstream buf;
    write_dataset(buf, records);
    CHECK(read_dataset(buf) == records);
}

TEST_CASE("preprocessing width, one-hot blocks and scaling") {
    const auto records = sample_records(500, 7);
    const auto table = preprocess(records);
    CHECK(table.feature_columns.size() == kFeatureCount);
    CHECK(table.feature_columns == feature_columns());
    REQUIRE(table.rows.size() == records.size());
    CHECK(table.labels.size() == records.size());
    std::array<double, kFeatureCount> lo, hi;
    lo.fill(1e9);
    hi.fill(-1e9);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        double type_sum = 0, step_sum = 0, proto_sum = 0;
        for (std::size_t c = 0; c < 14; ++c) type_sum += row[c];
        for (std::size_t c = 14; c < 19; ++c) step_sum += row[c];
        for (std::size_t c = 19; c < 23; ++c) proto_sum += row[c];
        CHECK(type_sum == 1.0);
        CHECK(step_sum == 1.0);
        CHECK(proto_sum == 1.0);
        CHECK(row[index_of(records[i].alert.alert_type)] == 1.0);
        CHECK(row[30] == (records[i].alert.campaign_id ? 1.0 : 0.0));
        CHECK(row[29] == doctest::Approx(records[i].corr_final / 4.0));
        if (!records[i].alert.campaign_id) CHECK(row[28] == 0.0);
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            CHECK(row[c] >= 0.0);
            CHECK(row[c] <= 1.0);
            lo[c] = std::min(lo[c], row[c]);
            hi[c] = std::max(hi[c], row[c]);
        }
    }
    for (std::size_t c = 23; c < 29; ++c) {
        CHECK(lo[c] == 0.0);
        CHECK(hi[c] == 1.0);
    }
}

TEST_CASE("preprocessed output and refusal to re-read it") {
    const auto records = sample_records(50, 8);
    std::stringstream out;
    write_preprocessed(out, preprocess(records));
    std::string header;
    std::getline(out, header);
    CHECK(std::count(header.begin(), header.end(), ',') == int(kFeatureCount));
    CHECK(header.substr(header.size() - 6) == ",label");
    std::stringstream again(out.str().insert(0, header + "\n"));
    CHECK_THROWS_AS(read_alerts(again), ParseError);
    CHECK_THROWS_AS(preprocess({}), PipelineError);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.0, 1.0, 0.25, 1.0 / 3.0, 0.1}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0) == "1");
}

TEST_CASE("attach correlation joins by alert id") {
    const auto chain = std::vector<Alert>{
        fixtures::alert(1, AlertType::phishing_alert, fixtures::kT0, fixtures::campus_host(1)),
        fixtures::alert(2, AlertType::ip_alert, fixtures::kT0 + kHour, fixtures::campus_host(1)),
        fixtures::alert(3, AlertType::ip_alert, fixtures::kT0 + kHour, fixtures::campus_host(9))};
    const auto out = correlate(chain, CorrelationParams{}, canonical_mapping());
    const auto records = attach_correlation(chain, out);
    REQUIRE(records.size() == 3);
    CHECK(records[0].cluster_id == std::optional<std::uint64_t>(1));
    CHECK(records[1].cluster_id == std::optional<std::uint64_t>(1));
    CHECK(records[0].corr_final == 1);
    CHECK(records[0].label == ScenarioLabel::two_steps);
    CHECK_FALSE(records[2].cluster_id.has_value());
    CHECK(records[2].label == ScenarioLabel::non_apt);
}
