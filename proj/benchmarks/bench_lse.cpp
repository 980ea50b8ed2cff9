#include <benchmark/benchmark.h>

#include <random>

#include "lse/harness.hpp"
#include "lse/solver.hpp"

using namespace lse;

namespace {

Image random_image(int side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 255.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(side) * side);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
  return Image(side, side, std::move(v));
}

}  // namespace

static void BM_TvNorm(benchmark::State& state) {
  const Image img = random_image(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tv_norm(img, TvFlavor::Isotropic));
  }
}
BENCHMARK(BM_TvNorm)->Arg(32)->Arg(64)->Arg(128);

static void BM_TvProx(benchmark::State& state) {
  const Image img = random_image(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        tv_prox(img, 1.0, TvFlavor::Isotropic, 50, 1e-5));
  }
}
BENCHMARK(BM_TvProx)->Arg(32)->Arg(64)->Arg(128);

static void BM_GradientStep(benchmark::State& state) {
  const Eigen::Index p = state.range(0) * state.range(0);
  const SensingOperator op = generate_gaussian_operator(p / 2, p, 3);
  const Image img = random_image(static_cast<int>(state.range(0)), 4);
  const Eigen::VectorXd y = op.apply(img.pixels());
  const Eigen::VectorXd r = Eigen::VectorXd::Zero(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradient_step(op, y, r, 0.25));
  }
}
BENCHMARK(BM_GradientStep)->Arg(32)->Arg(64);

static void BM_PowerIteration(benchmark::State& state) {
  const Eigen::Index p = state.range(0) * state.range(0);
  const SensingOperator op = generate_gaussian_operator(p / 2, p, 5);
  for (auto _ : state) {
    // estimate_lipschitz reruns the iteration; only op.lipschitz() caches
    benchmark::DoNotOptimize(estimate_lipschitz(op, 1e-6, 1000));
  }
}
BENCHMARK(BM_PowerIteration)->Arg(32)->Arg(64);

static void BM_SolveDefaultPhantom(benchmark::State& state) {
  const Image truth = render_phantom(default_phantom());
  const Eigen::Index p = truth.size();
  const SensingOperator op = generate_gaussian_operator(p / 2, p, 6);
  const MeasurementSet meas = measure(op, truth.pixels(), 0.0, 7);
  op.lipschitz();  // hoist the power iteration out of the loop
  SolverConfig cfg;
  cfg.alpha = 1.0;
  cfg.level = LevelSpec(70.0, 65.0, 255.0);
  cfg.rows = truth.rows();
  cfg.cols = truth.cols();
  cfg.max_iters = static_cast<int>(state.range(0));
  cfg.rel_tol = 1e-12;  // run the full iteration budget
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(op, meas, cfg));
  }
}
BENCHMARK(BM_SolveDefaultPhantom)->Arg(50)->Arg(200);

BENCHMARK_MAIN();
