// Serial reference loops vs their OpenMP counterparts, plus the factored
// eigensolver against a dense one. Run with --benchmark_filter to pick a group.
#include "nystrom/beamforming.hpp"
#include "nystrom/denoise.hpp"
#include "nystrom/error_analytics.hpp"
#include "nystrom/estimators.hpp"
#include "nystrom/image.hpp"
#include "nystrom/random.hpp"

#include <benchmark/benchmark.h>

#include <Eigen/Eigenvalues>
#include <random>
#include <string>

using namespace nystrom;

namespace {

Execution policy(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_MonteCarlo(benchmark::State& state) {
  const analytics::GroundTruthModel model(analytics::random_spd(8, 1), 12);
  const IndexSubset subset({0, 3, 5, 6}, 8);  // k = 4 of p = 8
  for (auto _ : state)
    benchmark::DoNotOptimize(analytics::monte_carlo_verify(model, subset, 20000, 7, policy(state)).empirical_mse);
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Denoise(benchmark::State& state) {
  const auto noisy = image::add_noise(image::synthetic_test_image(256, 256), 20.0, 1);
  const denoise::PatchGrid grid(256, 256);
  denoise::DenoiseConfig cfg;
  cfg.method = state.range(1) == 0 ? denoise::Method::pca : denoise::Method::nystrom;
  for (auto _ : state) benchmark::DoNotOptimize(denoise::denoise_image(noisy, grid, cfg, policy(state)).image);
  state.SetLabel(std::string(state.range(0) == 0 ? "serial " : "parallel ") +
                 std::string(denoise::method_name(cfg.method)));
}
BENCHMARK(BM_Denoise)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_BeamformTrials(benchmark::State& state) {
  beam::ExperimentConfig cfg;
  cfg.snr_db = {10.0};
  cfg.snapshots = {200};
  cfg.trials = 16;
  for (auto _ : state) benchmark::DoNotOptimize(beam::run_experiment(cfg, policy(state)));
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_BeamformTrials)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

RealData bench_data(Eigen::Index p, Eigen::Index n) {
  auto rng = make_stream(3, {static_cast<std::uint64_t>(p)});
  std::normal_distribution<double> normal;
  RealMatrix x(p, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  return RealData(std::move(x));
}

void BM_NystromEig(benchmark::State& state) {
  const Eigen::Index p = state.range(0);
  const RealData x = bench_data(p, 100);
  const IndexSubset subset = uniform_subset(p, 10, 1);
  for (auto _ : state) benchmark::DoNotOptimize(nystrom_eig(x, subset).eigenvalues);
  state.SetComplexityN(p);
}
BENCHMARK(BM_NystromEig)->RangeMultiplier(2)->Range(200, 1600)->Complexity(benchmark::oN);

void BM_DenseEig(benchmark::State& state) {
  const Eigen::Index p = state.range(0);
  const RealData x = bench_data(p, 100);
  const IndexSubset subset = uniform_subset(p, 10, 1);
  for (auto _ : state) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(nystrom_estimate(x, subset).densify());
    benchmark::DoNotOptimize(es.eigenvalues());
  }
  state.SetComplexityN(p);
}
BENCHMARK(BM_DenseEig)->RangeMultiplier(2)->Range(200, 800)->Complexity(benchmark::oNCubed)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
