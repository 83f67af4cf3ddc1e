#include <benchmark/benchmark.h>

#include <algorithm>

#include "aptsynth/correlation.hpp"
#include "aptsynth/noise_generator.hpp"
#include "aptsynth/pipeline.hpp"
#include "aptsynth/scenario_generator.hpp"

using namespace aptsynth;

namespace {

// n alerts inside one correlation window, a fifth of them full scenarios.
std::vector<Alert> window_alerts(std::size_t n, TimeRange window, DurationSeconds delta_t) {
    const auto env = NetworkEnvironment::make_default(9);
    const auto mapping = canonical_mapping();
    NoiseConfig cfg;
    cfg.time_range = {window.begin, window.end - 1};
    Rng rng(n);
    std::vector<Alert> out;
    while (out.size() < n / 5) {
        auto chain = generate_scenario({enumerate_shapes()[0], window.begin + uniform_int<EpochSeconds>(rng, 0, delta_t / 4)},
                                       mapping, env, delta_t, rng);
        out.insert(out.end(), chain.begin(), chain.end());
    }
    while (out.size() < n) out.push_back(generate_noise_alert(env, mapping, cfg, rng));
    out.resize(n);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].alert_id = i + 1;
    std::sort(out.begin(), out.end(), [](const Alert& a, const Alert& b) { return a.timestamp < b.timestamp; });
    return out;
}

void BM_ClusterWindow(benchmark::State& state) {
    const CorrelationParams p;
    const TimeRange window{kDefaultTimeRange.begin, kDefaultTimeRange.begin + p.delta_t};
    const auto alerts = window_alerts(static_cast<std::size_t>(state.range(0)), window, p.delta_t);
    const auto mapping = canonical_mapping();
    for (auto _ : state) benchmark::DoNotOptimize(cluster_window(alerts, window, p, mapping));
    state.SetComplexityN(state.range(0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClusterWindow)->RangeMultiplier(2)->Range(1000, 16000)->Complexity()->Unit(benchmark::kMillisecond);

// Same window with tau below the cross-host bound, which disables host
// bucketing and exercises the full pairwise search.
void BM_ClusterWindowUnbucketed(benchmark::State& state) {
    CorrelationParams p;
    p.tau = 0.3;
    const TimeRange window{kDefaultTimeRange.begin, kDefaultTimeRange.begin + p.delta_t};
    const auto alerts = window_alerts(static_cast<std::size_t>(state.range(0)), window, p.delta_t);
    const auto mapping = canonical_mapping();
    for (auto _ : state) benchmark::DoNotOptimize(cluster_window(alerts, window, p, mapping));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ClusterWindowUnbucketed)->RangeMultiplier(2)->Range(500, 4000)->Complexity()->Unit(benchmark::kMillisecond);

class Assembled : public benchmark::Fixture {
public:
    void SetUp(const benchmark::State& state) override {
        if (!alerts.empty()) return;
        RunConfig cfg;
        cfg.noise_count = 72000;
        cfg.apt_count = 48000;
        alerts = assemble_dataset(cfg, build_environment(cfg), resolve_mapping(cfg)).alerts;
        (void)state;
    }
    static inline std::vector<Alert> alerts;
};

BENCHMARK_DEFINE_F(Assembled, Correlate)(benchmark::State& state) {
    CorrelationParams p;
    p.threads = static_cast<unsigned>(state.range(0));
    const auto mapping = canonical_mapping();
    for (auto _ : state) benchmark::DoNotOptimize(correlate(alerts, p, mapping));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(alerts.size()));
}
BENCHMARK_REGISTER_F(Assembled, Correlate)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_NoiseBatch(benchmark::State& state) {
    const auto env = NetworkEnvironment::make_default(1);
    const auto mapping = canonical_mapping();
    const CorrelationParams p;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            generate_noise_batch(static_cast<std::size_t>(state.range(0)), env, mapping, NoiseConfig{}, p, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NoiseBatch)->Arg(10000)->Arg(40000)->Unit(benchmark::kMillisecond);

void BM_PlanCampaigns(benchmark::State& state) {
    const auto env = NetworkEnvironment::make_default(1);
    const auto mapping = canonical_mapping();
    for (auto _ : state)
        benchmark::DoNotOptimize(plan_campaigns(static_cast<std::size_t>(state.range(0)), {}, env, mapping, 168 * kHour,
                                                kDefaultTimeRange, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PlanCampaigns)->Arg(48000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
