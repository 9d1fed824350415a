#include <random>

#include <benchmark/benchmark.h>

#include "pmp/kernels.hpp"
#include "pmp/pmpcheck.hpp"
#include "pmp/registry.hpp"

namespace {

struct Fixture {
  pmp::ProblemSpec p = pmp::make_problem("pendulum");
  pmp::Candidate cand{pmp::make_control("pendulum", "bang"), std::nullopt};
  std::vector<double> times;
  std::vector<pmp::Vec> centers, offsets, M;
  std::vector<pmp::kernels::MpPoint> pts;
  std::vector<pmp::Vec> zetas;
  pmp::NeedleSpec S;
  pmp::BieleckiContext ctx;
  std::vector<pmp::Vec> as;

  Fixture() {
    cand.trajectory = pmp::solve_rk(p, cand.control, pmp::default_grid_step(p.T));
    times = cand.trajectory->unique_times();
    for (double t : times) centers.push_back((*cand.trajectory)(t));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 20; ++i) offsets.push_back(0.1 * pmp::Vec::NullaryExpr(p.n, [&] { return nd(rng); }));
    M = pmp::control_value_set(cand.control, nullptr);
    for (double t : times) {
      pts.push_back({t, (*cand.trajectory)(t), cand.control.eval(t), pmp::RowVec::Ones(p.n)});
    }
    zetas = pmp::make_sample_plan(p.uset, 7).zetas;
    S = pmp::uniform_family(p, 4);
    ctx = pmp::make_bielecki_context(1.0, 0.5, 1.0, 0.1, p.T);
    for (int j = 1; j <= 16; ++j) as.push_back(pmp::Vec::Constant(static_cast<pmp::Index>(S.size()), 1e-3 / j));
  }
};

Fixture& fx() {
  static Fixture f;
  return f;
}

void BM_LipschitzSerial(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) benchmark::DoNotOptimize(pmp::kernels::lipschitz_scan_serial(f.p, f.times, f.centers, f.offsets, f.M));
}
void BM_LipschitzParallel(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) benchmark::DoNotOptimize(pmp::kernels::lipschitz_scan_parallel(f.p, f.times, f.centers, f.offsets, f.M));
}
void BM_MpScanSerial(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) benchmark::DoNotOptimize(pmp::kernels::mp_scan_serial(f.p, f.pts, f.zetas, 0.0));
}
void BM_MpScanParallel(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) benchmark::DoNotOptimize(pmp::kernels::mp_scan_parallel(f.p, f.pts, f.zetas, 0.0));
}
void BM_KappaSerial(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) benchmark::DoNotOptimize(pmp::kernels::kappa_batch_serial(f.p, f.cand, f.S, f.ctx, f.as, 1e-3));
}
void BM_KappaParallel(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) benchmark::DoNotOptimize(pmp::kernels::kappa_batch_parallel(f.p, f.cand, f.S, f.ctx, f.as, 1e-3));
}
void BM_GridOracleSerial(benchmark::State& st) {
  const pmp::Mat W = pmp::Mat::Random(4, 3);
  for (auto _ : st) benchmark::DoNotOptimize(pmp::kernels::grid_min_violation_serial(W, 2, 50));
}
void BM_GridOracleParallel(benchmark::State& st) {
  const pmp::Mat W = pmp::Mat::Random(4, 3);
  for (auto _ : st) benchmark::DoNotOptimize(pmp::kernels::grid_min_violation_parallel(W, 2, 50));
}

}  // namespace

BENCHMARK(BM_LipschitzSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LipschitzParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MpScanSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MpScanParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_KappaSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KappaParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GridOracleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridOracleParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
