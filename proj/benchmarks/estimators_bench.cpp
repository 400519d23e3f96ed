#include <benchmark/benchmark.h>

#include "qrv/estimators.hpp"
#include "qrv/preaveraging.hpp"
#include "qrv/rng.hpp"
#include "qrv/scaling_table.hpp"
#include "qrv/simulate.hpp"

namespace {

qrv::ReturnSeries bm_series(std::size_t n) {
  return qrv::simulate_path(qrv::ModelSpec::defaults(qrv::ModelKind::bm), n, 11).returns();
}

// Small budget: timing does not depend on constant accuracy.
qrv::MonteCarloConfig quick_mc() {
  qrv::MonteCarloConfig mc;
  mc.replications = 100'000;
  return mc;
}

const std::vector<double> kLambdas{0.80, 0.85, 0.90, 0.95};

void BM_Philox(benchmark::State& state) {
  qrv::Philox eng(1, qrv::Stream::bench);
  for (auto _ : state) benchmark::DoNotOptimize(eng());
}
BENCHMARK(BM_Philox);

void BM_Normal(benchmark::State& state) {
  qrv::NormalSource z(1, qrv::Stream::bench);
  for (auto _ : state) benchmark::DoNotOptimize(z());
}
BENCHMARK(BM_Normal);

void BM_RV(benchmark::State& state) {
  const auto s = bm_series(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qrv::rv(s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RV)->Arg(1000)->Arg(100'000);

void BM_MedRV(benchmark::State& state) {
  const auto s = bm_series(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qrv::medrv(s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MedRV)->Arg(1000)->Arg(100'000);

void BM_QRV(benchmark::State& state) {
  const auto s = bm_series(static_cast<std::size_t>(state.range(0)));
  qrv::QuantileConfig cfg{qrv::QuantileVector(kLambdas), {0.25, 0.25, 0.25, 0.25}, 20,
                          state.range(1) ? qrv::Mode::subsampled : qrv::Mode::blocked};
  qrv::ScalingTable table;
  const auto keys = qrv::required_keys(cfg);
  table.ensure(keys, quick_mc());
  for (auto _ : state) benchmark::DoNotOptimize(qrv::qrv(s, cfg, table).value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QRV)->Args({1000, 0})->Args({100'000, 0})->Args({1000, 1})->Args({100'000, 1});

void BM_QRVStar(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto path = qrv::simulate_path(qrv::ModelSpec::defaults(qrv::ModelKind::bm), n, 11);
  path = qrv::add_noise(std::move(path), 2.5, 11);
  const auto s = path.returns();
  qrv::PreAvgConfig cfg;
  cfg.K = 20;
  cfg.lambdas = qrv::QuantileVector(kLambdas);
  cfg.weights = {0.25, 0.25, 0.25, 0.25};
  cfg.m = 40;
  qrv::ScalingTable table;
  const auto keys = qrv::required_keys(cfg.quantile_config());
  table.ensure(keys, quick_mc());
  const auto noise = qrv::noise_variance(s);
  for (auto _ : state) benchmark::DoNotOptimize(qrv::qrv_star(s, cfg, table, noise).value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QRVStar)->Arg(10'000)->Arg(40'000);

void BM_NuMoment(benchmark::State& state) {
  qrv::MonteCarloConfig mc = quick_mc();
  for (auto _ : state) benchmark::DoNotOptimize(qrv::nu_moment(qrv::scaling_key(20, 0.9), mc).value);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mc.replications));
}
BENCHMARK(BM_NuMoment);

void BM_SimulateSV(benchmark::State& state) {
  const auto model = qrv::ModelSpec::defaults(qrv::ModelKind::sv_lev);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(qrv::simulate_path(model, 1000, ++seed).true_iv);
}
BENCHMARK(BM_SimulateSV);

}  // namespace

BENCHMARK_MAIN();
