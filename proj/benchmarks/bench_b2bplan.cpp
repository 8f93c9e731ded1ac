#include <string>

#include <benchmark/benchmark.h>

#include "b2bplan/network.hpp"
#include "b2bplan/pairing.hpp"
#include "b2bplan/siting.hpp"
#include "b2bplan/sizing.hpp"
#include "b2bplan/transfer.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace {

using namespace b2b;

// One year at half-hour resolution.
constexpr std::size_t kYear = 17520;

void BM_SimulateTransfer(benchmark::State& state) {
    testing::Rng rng(1);
    const auto p1 = testing::random_profile(rng, kYear);
    const auto p2 = testing::random_profile(rng, kYear);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_transfer(p1, p2, ConverterSpec{500.0, 0.98}));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(kYear));
}
BENCHMARK(BM_SimulateTransfer);

void BM_SavingsCurve(benchmark::State& state) {
    testing::Rng rng(2);
    const auto p1 = testing::random_profile(rng, kYear);
    const auto p2 = testing::random_profile(rng, kYear);
    const auto sizes = SizeGridSpec{50, 1500, 50}.points();
    const auto threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(savings_curve(p1, p2, sizes, 0.98, SavingsRule::clamped, threads));
}
BENCHMARK(BM_SavingsCurve)->Arg(1)->Arg(4)->UseRealTime();

void BM_AnalyzeSizing(benchmark::State& state) {
    const std::string dir = B2BPLAN_DATA_DIR "/profiles/";
    const auto p1 = load_profile_csv(dir + "case1_feeder1.csv");
    const auto p2 = load_profile_csv(dir + "case1_feeder2.csv");
    const auto curve = savings_curve(p1, p2, SizeGridSpec{200, 1500, 50}.points(), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(analyze_sizing(curve, EconomicParams{}));
}
BENCHMARK(BM_AnalyzeSizing);

void BM_SelectOptimal(benchmark::State& state) {
    SizeOptionTable t;
    t.s_min = 350;
    t.opt_j1 = {500};
    t.opt_j2 = {400, 450};
    t.opt_tor1 = 600;
    t.opt_tor2 = 350;
    t.s_max = 700;
    t.s_max1 = 700;
    t.s_max2 = 450;
    for (auto _ : state) benchmark::DoNotOptimize(select_optimal(t));
}
BENCHMARK(BM_SelectOptimal);

void BM_PowerFlow(benchmark::State& state) {
    testing::Rng rng(4);
    const auto net = testing::tame(testing::random_feeder(rng, static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(solve_power_flow(net));
}
BENCHMARK(BM_PowerFlow)->Arg(10)->Arg(100)->Arg(500);

void BM_Vlsm(benchmark::State& state) {
    testing::Rng rng(5);
    const auto net = testing::tame(testing::random_feeder(rng, static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(compute_vlsm(net));
}
BENCHMARK(BM_Vlsm)->Arg(10)->Arg(50)->Arg(100);

void BM_SiteConnectionPoint(benchmark::State& state) {
    testing::Rng rng(6);
    const auto net = testing::tame(testing::random_feeder(rng, 100));
    const auto m = compute_vlsm(net);
    SitingConfig cfg;
    cfg.der_buses = {net.buses()[10].id, net.buses()[40].id, net.buses()[70].id};
    for (auto _ : state) benchmark::DoNotOptimize(site_connection_point(net, m, cfg));
}
BENCHMARK(BM_SiteConnectionPoint);

void BM_ScenarioStudy(benchmark::State& state) {
    StudyConfig cfg;
    cfg.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(scenario_grid_study(cfg));
}
BENCHMARK(BM_ScenarioStudy)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
