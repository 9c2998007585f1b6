#include <benchmark/benchmark.h>

#include <vector>

#include "sliceq/dysa.hpp"
#include "sliceq/metrics.hpp"
#include "sliceq/modsys.hpp"
#include "sliceq/netsim.hpp"
#include "sliceq/sea.hpp"
#include "sliceq/split.hpp"

using namespace sliceq;

namespace {

// Shared fixture: the reference campaign and per-kind estimators trained on
// its 70% split, built once.
struct Fixture {
    Dataset dataset;
    Dataset train_rows;
    netsim::SimParams sim = netsim::SimParams::defaults();
    std::vector<std::pair<modsys::RegressorKind, modsys::TrainedModel>>
        models;
    std::vector<double> probe;

    Fixture() {
        dataset =
            sea::execute_campaign(sea::CampaignPlan::reference(), sim);
        auto [train, holdout] = train_test_split(dataset, 0.7, 42);
        train_rows = std::move(train);
        for (const auto kind : modsys::kAllRegressorKinds) {
            models.emplace_back(
                kind, modsys::fit_kqi(kind, train_rows,
                                      KqiId::AvgThroughput, {}));
        }
        const FeatureVector f = feature_vector(holdout.front());
        probe.assign(f.begin(), f.end());
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_RSquared(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> actual(n), predicted(n);
    for (std::size_t i = 0; i < n; ++i) {
        actual[i] = static_cast<double>(i % 97);
        predicted[i] = actual[i] + 0.1;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(r_squared(actual, predicted));
    }
}
BENCHMARK(BM_RSquared)->Arg(240)->Arg(4096);

void BM_RadioConditions(benchmark::State& state) {
    const netsim::CellSite cell{0, 30.0, 3.2, 3.0};
    const netsim::ChannelParams channel;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            netsim::radio_conditions(cell, 480.0, channel, seed++));
    }
}
BENCHMARK(BM_RadioConditions);

void BM_SimulatePlayback(benchmark::State& state) {
    const auto& f = fixture();
    const RadioConditions radio =
        netsim::derive_radio(-97.0, f.sim.channel);
    const SliceConfig config = SliceConfig::make(0, 10.0);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            netsim::simulate_playback(radio, config, 60.0, f.sim, seed++));
    }
}
BENCHMARK(BM_SimulatePlayback);

void BM_ExecuteCampaign(benchmark::State& state) {
    sea::CampaignPlan plan = sea::CampaignPlan::reference();
    plan.playbacks_per_config = static_cast<int>(state.range(0));
    const auto sim = netsim::SimParams::defaults();
    for (auto _ : state) {
        benchmark::DoNotOptimize(sea::execute_campaign(plan, sim));
    }
}
BENCHMARK(BM_ExecuteCampaign)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

// Per-kind single prediction on 560-row models: the estimation-time
// comparison that matters for negotiation and reallocation loops.
void BM_Predict(benchmark::State& state) {
    const auto& f = fixture();
    const auto& [kind, model] = f.models[state.range(0)];
    state.SetLabel(std::string(modsys::regressor_name(kind)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(modsys::predict(model, f.probe));
    }
}
BENCHMARK(BM_Predict)->DenseRange(0, 6);

void BM_FitKind(benchmark::State& state) {
    const auto& f = fixture();
    const auto kind = modsys::kAllRegressorKinds[state.range(0)];
    state.SetLabel(std::string(modsys::regressor_name(kind)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            modsys::fit_kqi(kind, f.train_rows, KqiId::AvgThroughput, {}));
    }
}
BENCHMARK(BM_FitKind)->DenseRange(0, 6)->Unit(benchmark::kMillisecond);

void BM_SelectConfig(benchmark::State& state) {
    const auto& f = fixture();
    static const modsys::ModelRegistry registry = modsys::select_best(
        f.train_rows, {modsys::RegressorKind::DTR}, 5, 42);
    const std::vector<SliceConfig> catalog =
        sea::CampaignPlan::reference().configs;
    const std::vector<dysa::KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    const RadioConditions radio = netsim::derive_radio(-98.0, f.sim.channel);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dysa::select_config(
            targets, radio, registry, catalog, {}, f.sim.channel));
    }
}
BENCHMARK(BM_SelectConfig);

}  // namespace

BENCHMARK_MAIN();
