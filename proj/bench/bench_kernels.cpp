#include <benchmark/benchmark.h>

#include <map>

#include "mrsl/kde.hpp"
#include "mrsl/neighbors.hpp"
#include "mrsl/rsl.hpp"
#include "mrsl/samplers.hpp"

namespace {

const mrsl::PointCloud& cloud(std::size_t n) {
  static std::map<std::size_t, mrsl::PointCloud> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    const auto spec = mrsl::ManifoldDensitySpec::uniform_sphere(2, 1.0, 3);
    it = cache.emplace(n, mrsl::sample(spec, mrsl::NoiseSpec::none(), n, 42).observed).first;
  }
  return it->second;
}

void BM_KnnParallel(benchmark::State& state) {
  const auto& pts = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mrsl::knn_radius_brute(pts, 10));
}

void BM_KnnReference(benchmark::State& state) {
  const auto& pts = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mrsl::reference::knn_radius(pts, 10));
}

void BM_KnnGrid(benchmark::State& state) {
  const auto& pts = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    mrsl::DistanceIndex index(pts, mrsl::IndexMode::Grid);
    benchmark::DoNotOptimize(index.knn_radius(10));
  }
}

void BM_RadiusParallel(benchmark::State& state) {
  const auto& pts = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mrsl::radius_neighbors_brute(pts, 0.1));
}

void BM_RadiusReference(benchmark::State& state) {
  const auto& pts = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mrsl::reference::radius_neighbors(pts, 0.1));
}

void sweep(benchmark::State& state, mrsl::SweepBackend backend) {
  const auto& pts = cloud(static_cast<std::size_t>(state.range(0)));
  mrsl::RSLConfig cfg;
  cfg.k = 10;
  cfg.rule = mrsl::ConnectionRule::proportional(4.0);
  cfg.horizon = 0.2;
  cfg.backend = backend;
  cfg.index_mode = mrsl::IndexMode::BruteForce;
  for (auto _ : state) benchmark::DoNotOptimize(mrsl::rsl_sweep(pts, cfg));
}

void BM_SweepDensePrim(benchmark::State& state) { sweep(state, mrsl::SweepBackend::DensePrim); }
void BM_SweepSparse(benchmark::State& state) { sweep(state, mrsl::SweepBackend::SparseKruskal); }
void BM_SweepReference(benchmark::State& state) {
  sweep(state, mrsl::SweepBackend::ReferenceKruskal);
}

void BM_KdeMany(benchmark::State& state) {
  const auto& pts = cloud(static_cast<std::size_t>(state.range(0)));
  mrsl::KDEConfig cfg;
  cfg.h = 0.2;
  cfg.d = 2;
  for (auto _ : state) benchmark::DoNotOptimize(mrsl::kde_at_many(pts, pts, cfg));
}

}  // namespace

BENCHMARK(BM_KnnParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnReference)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnGrid)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RadiusParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RadiusReference)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepDensePrim)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSparse)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepReference)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KdeMany)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
