// Serial reference vs OpenMP for the data-parallel kernels and the LOOCV fold
// loop. Arg(0) is serial, Arg(1) parallel.

#include <random>

#include <benchmark/benchmark.h>

#include "shapeinst/kernels.hpp"
#include "shapeinst/phantom.hpp"
#include "shapeinst/scanplane.hpp"
#include "shapeinst/validate.hpp"

using namespace shapeinst;

namespace {

Eigen::MatrixXd random_rows(Eigen::Index rows, Eigen::Index cols) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(rows, cols);
  for (auto& x : m.reshaped()) x = nd(rng);
  return m;
}

Execution mode(const benchmark::State& s) {
  return s.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_PairwiseSqDistances(benchmark::State& state) {
  const Eigen::MatrixXd x = random_rows(state.range(1), 128);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_sq_distances(x, mode(state)));
}
BENCHMARK(BM_PairwiseSqDistances)->ArgsProduct({{0, 1}, {25, 200}});

void BM_VertexDistances(benchmark::State& state) {
  const Eigen::MatrixXd a = random_rows(state.range(1), 3);
  const Eigen::MatrixXd b = a + random_rows(state.range(1), 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::vertex_distances(a, b, mode(state)));
}
BENCHMARK(BM_VertexDistances)->ArgsProduct({{0, 1}, {1000, 100000}});

void BM_ContourSequence(benchmark::State& state) {
  const ShapeSequence3D seq = generate(PhantomSpec{});
  const ScanPlane plane = ScanPlane::from_normal({0, 0, 0}, {0, 0, 1});
  for (auto _ : state) benchmark::DoNotOptimize(build_contour_sequence(seq, plane, 64, mode(state)));
}
BENCHMARK(BM_ContourSequence)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Loocv(benchmark::State& state) {
  const ShapeSequence3D seq = generate(PhantomSpec{});
  const auto contours =
      build_contour_sequence(seq, ScanPlane::from_normal({0, 0, 0}, {0, 0, 1}), 64);
  const RegressorConfig cfg{RegressorKind::kplsr, 8, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(loocv(seq, contours, cfg, mode(state)));
}
BENCHMARK(BM_Loocv)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
