#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lse/solver.hpp"

using namespace lse;

namespace {

Eigen::VectorXd rand_vector(Eigen::Index n, std::mt19937_64& rng, double lo,
                            double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

double tv_oracle(const Image& x, TvFlavor flavor) {
  const int m = x.rows(), n = x.cols();
  double total = 0.0;
  for (int i = 0; i + 1 < m; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      const double dv = x(i, j) - x(i + 1, j);
      const double dh = x(i, j) - x(i, j + 1);
      total += flavor == TvFlavor::Isotropic
                   ? std::sqrt(dv * dv + dh * dh)
                   : std::abs(dv) + std::abs(dh);
    }
  }
  for (int i = 0; i + 1 < m; ++i) total += std::abs(x(i, n - 1) - x(i + 1, n - 1));
  for (int j = 0; j + 1 < n; ++j) total += std::abs(x(m - 1, j) - x(m - 1, j + 1));
  return total;
}

double objective(const SensingOperator& op, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& x, double alpha, int m, int n,
                 TvFlavor flavor) {
  return 0.5 * (op.apply(x) - y).squaredNorm() +
         alpha * tv_oracle(reshape_to_image(x, m, n), flavor);
}

// One element of the isotropic TV subdifferential, assembled term by term.
Eigen::VectorXd tv_subgradient(const Eigen::VectorXd& x, int m, int n) {
  const auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  const auto at = [&](int i, int j) { return x[static_cast<Eigen::Index>(i) * n + j]; };
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  const auto add = [&](int i, int j, double v) {
    g[static_cast<Eigen::Index>(i) * n + j] += v;
  };
  for (int i = 0; i + 1 < m; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      const double dv = at(i, j) - at(i + 1, j);
      const double dh = at(i, j) - at(i, j + 1);
      const double norm = std::sqrt(dv * dv + dh * dh);
      if (norm > 0.0) {
        add(i, j, (dv + dh) / norm);
        add(i + 1, j, -dv / norm);
        add(i, j + 1, -dh / norm);
      }
    }
  }
  for (int i = 0; i + 1 < m; ++i) {
    const double s = sign(at(i, n - 1) - at(i + 1, n - 1));
    add(i, n - 1, s);
    add(i + 1, n - 1, -s);
  }
  for (int j = 0; j + 1 < n; ++j) {
    const double s = sign(at(m - 1, j) - at(m - 1, j + 1));
    add(m - 1, j, s);
    add(m - 1, j + 1, -s);
  }
  return g;
}

// Projected subgradient descent on the strongly convex box-constrained
// objective; returns the best objective value seen.
double subgradient_best(const SensingOperator& op, const Eigen::VectorXd& y,
                        double alpha, int m, int n, double lower, double upper,
                        int iterations, std::mt19937_64& rng) {
  Eigen::VectorXd x = rand_vector(m * n, rng, lower, upper);
  double best = objective(op, y, x, alpha, m, n, TvFlavor::Isotropic);
  for (int t = 1; t <= iterations; ++t) {
    const Eigen::VectorXd g =
        op.apply_adjoint(op.apply(x) - y) + alpha * tv_subgradient(x, m, n);
    const double step = 2.0 / (t + 1.0);  // strong convexity constant 1
    x = (x - step * g).cwiseMax(lower).cwiseMin(upper);
    best = std::min(best, objective(op, y, x, alpha, m, n, TvFlavor::Isotropic));
  }
  return best;
}

SolverConfig base_config(int rows, int cols, double alpha, double gamma,
                         double lower, double upper) {
  SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.level = LevelSpec(gamma, lower, upper);
  cfg.rows = rows;
  cfg.cols = cols;
  return cfg;
}

}  // namespace

TEST_CASE("gradient_step is stationary at a data-consistent point") {
  std::mt19937_64 rng(3);
  const SensingOperator op = generate_gaussian_operator(6, 12, 17);
  const Eigen::VectorXd r = rand_vector(12, rng, -1.0, 1.0);
  const Eigen::VectorXd y = op.apply(r);
  CHECK((gradient_step(op, y, r, 0.3) - r).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("gradient_step with identity operator and zero data is a contraction to zero") {
  const SensingOperator id(Eigen::MatrixXd::Identity(5, 5));
  std::mt19937_64 rng(5);
  const Eigen::VectorXd r = rand_vector(5, rng, -10.0, 10.0);
  const Eigen::VectorXd out = gradient_step(id, Eigen::VectorXd::Zero(5), r, 1.0);
  CHECK(out.isZero(1e-15));
}

TEST_CASE("gradient_step matches explicit dense arithmetic") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const SensingOperator op =
        generate_gaussian_operator(4, 9, 100 + static_cast<std::uint64_t>(trial));
    const Eigen::VectorXd r = rand_vector(9, rng, -2.0, 2.0);
    const Eigen::VectorXd y = rand_vector(4, rng, -2.0, 2.0);
    const double rho = 0.7;
    const Eigen::MatrixXd& a = op.entries();
    const Eigen::VectorXd expected = r - rho * a.transpose() * (a * r - y);
    CHECK((gradient_step(op, y, r, rho) - expected).lpNorm<Eigen::Infinity>() <=
          1e-12);
  }
}

TEST_CASE("gradient_step validates dimensions") {
  const SensingOperator op = generate_gaussian_operator(4, 6, 1);
  CHECK_THROWS_AS(
      gradient_step(op, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(6), 1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      gradient_step(op, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(5), 1.0),
      std::invalid_argument);
}

TEST_CASE("project_box clamps exactly as defined") {
  Eigen::VectorXd v(3);
  v << 3, -2, 300;
  const Eigen::VectorXd out = project_box(v, 0.0, 255.0);
  CHECK(out[0] == 3.0);    // inside: untouched
  CHECK(out[1] == 0.0);    // below: lower bound
  CHECK(out[2] == 255.0);  // above: upper bound
  CHECK_THROWS_AS(project_box(v, 255.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(project_box(v, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("momentum_update follows the momentum recursion") {
  CHECK(momentum_update(1.0) ==
        doctest::Approx(0.5 * (1.0 + std::sqrt(5.0))).epsilon(1e-14));
  CHECK(momentum_update(1.0) == doctest::Approx(1.618034).epsilon(1e-6));

  const double t1 = 1.618034;
  CHECK(momentum_update(t1) ==
        doctest::Approx(0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t1 * t1)))
            .epsilon(1e-14));
  CHECK(momentum_update(t1) == doctest::Approx(2.193527).epsilon(1e-6));

  // asymptotically t + 1/2
  CHECK(momentum_update(1000.0) == doctest::Approx(1000.5).epsilon(1e-3));
  CHECK(momentum_update(2.0) > 2.0);
}

TEST_CASE("solve recovers in-range data when the TV weight vanishes") {
  std::mt19937_64 rng(11);
  const int m = 4, n = 4;
  const SensingOperator id(Eigen::MatrixXd::Identity(16, 16));
  const Eigen::VectorXd x = rand_vector(16, rng, 10.0, 240.0);
  const MeasurementSet meas{x, 0.0, 0};
  SolverConfig cfg = base_config(m, n, 1e-8, 50.0, 0.0, 255.0);
  cfg.rel_tol = 1e-8;
  cfg.max_iters = 2000;
  const SolverResult res = solve(id, meas, cfg);
  CHECK(res.converged);
  CHECK((res.estimate.pixels() - x).lpNorm<Eigen::Infinity>() <= 1e-4);
}

TEST_CASE("solve returns zero for zero measurements") {
  const SensingOperator op = generate_gaussian_operator(8, 16, 19);
  const MeasurementSet meas{Eigen::VectorXd::Zero(8), 0.0, 0};
  const SolverResult res = solve(op, meas, base_config(4, 4, 5.0, 50.0, 0.0, 255.0));
  CHECK(res.converged);
  CHECK(res.iterations == 1);  // x^1 == x^0 == 0
  CHECK(res.estimate.pixels().isZero(0.0));
}

TEST_CASE("solve reproduces a constant image exactly despite regularization") {
  const double c = 120.0;
  const SensingOperator id(Eigen::MatrixXd::Identity(16, 16));
  const Eigen::VectorXd truth = Eigen::VectorXd::Constant(16, c);
  const MeasurementSet meas{truth, 0.0, 0};
  SolverConfig cfg = base_config(4, 4, 5.0, 60.0, 0.0, 255.0);
  cfg.max_iters = 3000;
  cfg.rel_tol = 1e-9;
  const SolverResult res = solve(id, meas, cfg);
  // c*1 has zero data misfit and zero TV, hence it is the global optimum
  CHECK(objective(id, truth, truth, cfg.alpha, 4, 4, cfg.flavor) == 0.0);
  CHECK((res.estimate.pixels() - truth).lpNorm<Eigen::Infinity>() <= 1e-4);
}

TEST_CASE("solve keeps iterates feasible and the objective envelope") {
  std::mt19937_64 rng(23);
  const int m = 8, n = 8;
  const SensingOperator op = generate_gaussian_operator(32, 64, 31);
  const Eigen::VectorXd x = rand_vector(64, rng, 0.0, 255.0);
  const MeasurementSet meas = measure(op, x, 0.0, 0);
  SolverConfig cfg = base_config(m, n, 1.0, 70.0, 65.0, 255.0);
  cfg.max_iters = 400;
  const SolverResult res = solve(op, meas, cfg);

  CHECK(res.estimate.pixels().minCoeff() >= 65.0);
  CHECK(res.estimate.pixels().maxCoeff() <= 255.0);

  REQUIRE_FALSE(res.objective_trace.empty());
  CHECK(res.objective_trace.back() <= res.objective_trace.front() + 1e-9);

  // At a tight tolerance the trace flattens: the final value sits within
  // 1e-6 (relative) of the running minimum.
  SolverConfig tight = cfg;
  tight.rel_tol = 1e-8;
  tight.max_iters = 5000;
  const SolverResult converged = solve(op, meas, tight);
  REQUIRE(converged.converged);
  const double running_min =
      *std::min_element(converged.objective_trace.begin(),
                        converged.objective_trace.end());
  CHECK(converged.objective_trace.back() <=
        running_min + 1e-6 * std::max(1.0, std::abs(running_min)));
}

TEST_CASE("solve lands on an approximate fixed point") {
  std::mt19937_64 rng(29);
  const int m = 8, n = 8;
  const SensingOperator op = generate_gaussian_operator(32, 64, 37);
  const Eigen::VectorXd x = rand_vector(64, rng, 40.0, 200.0);
  const MeasurementSet meas = measure(op, x, 0.0, 0);
  SolverConfig cfg = base_config(m, n, 1.0, 70.0, 65.0, 255.0);
  cfg.max_iters = 2000;
  const SolverResult res = solve(op, meas, cfg);
  REQUIRE(res.converged);

  const double rho = 1.0 / op.lipschitz();
  const Eigen::VectorXd& xhat = res.estimate.pixels();
  const Eigen::VectorXd grad_point = gradient_step(op, meas.y, xhat, rho);
  const Image prox = tv_prox(reshape_to_image(grad_point, m, n),
                             cfg.alpha * rho, cfg.flavor, cfg.inner_iters,
                             cfg.inner_tol);
  const Eigen::VectorXd mapped = project_box(prox.pixels(), 65.0, 255.0);
  const double residual =
      (xhat - mapped).norm() / std::max(1.0, xhat.norm());
  CHECK(residual <= 10.0 * cfg.rel_tol);
}

TEST_CASE("solve is deterministic") {
  const SensingOperator op = generate_gaussian_operator(20, 36, 41);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(36, 0.0, 255.0);
  const MeasurementSet meas = measure(op, x, 10.0, 43);
  const SolverConfig cfg = base_config(6, 6, 0.5, 70.0, 65.0, 255.0);
  const SolverResult a = solve(op, meas, cfg);
  const SolverResult b = solve(op, meas, cfg);
  CHECK(a.estimate.pixels() == b.estimate.pixels());
  CHECK(a.iterations == b.iterations);
  CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("solve matches a long projected-subgradient run on a small instance") {
  std::mt19937_64 rng(47);
  const int m = 4, n = 4;
  const SensingOperator id(Eigen::MatrixXd::Identity(16, 16));
  const Eigen::VectorXd y = rand_vector(16, rng, 0.0, 1.0);
  const MeasurementSet meas{y, 0.0, 0};

  SolverConfig cfg = base_config(m, n, 0.1, 0.5, 0.0, 1.0);
  cfg.max_iters = 5000;
  cfg.rel_tol = 1e-12;
  cfg.inner_iters = 300;
  cfg.inner_tol = 1e-13;
  const SolverResult res = solve(id, meas, cfg);
  const double solver_obj = objective(id, y, res.estimate.pixels(), cfg.alpha,
                                      m, n, cfg.flavor);
  const double oracle_obj =
      subgradient_best(id, y, cfg.alpha, m, n, 0.0, 1.0, 300000, rng);
  CHECK(std::abs(solver_obj - oracle_obj) <= 1e-4);
}

TEST_CASE("solve aborts with a numerical failure on non-finite data") {
  const SensingOperator op = generate_gaussian_operator(8, 16, 53);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(8);
  y[3] = std::numeric_limits<double>::infinity();
  const MeasurementSet meas{y, 0.0, 0};
  try {
    solve(op, meas, base_config(4, 4, 1.0, 50.0, 0.0, 255.0));
    FAIL("expected NumericalFailure");
  } catch (const NumericalFailure& e) {
    CHECK(e.iteration() >= 1);
    CHECK(doctest::String(e.what()).size() > 0);
  }
}

TEST_CASE("solve validates configuration") {
  const SensingOperator op = generate_gaussian_operator(8, 16, 59);
  const MeasurementSet meas{Eigen::VectorXd::Zero(8), 0.0, 0};
  SolverConfig cfg = base_config(4, 4, 1.0, 50.0, 0.0, 255.0);

  SolverConfig wrong_shape = cfg;
  wrong_shape.rows = 3;
  CHECK_THROWS_AS(solve(op, meas, wrong_shape), std::invalid_argument);

  SolverConfig bad_alpha = cfg;
  bad_alpha.alpha = 0.0;
  CHECK_THROWS_AS(solve(op, meas, bad_alpha), std::invalid_argument);

  MeasurementSet wrong_y{Eigen::VectorXd::Zero(7), 0.0, 0};
  CHECK_THROWS_AS(solve(op, wrong_y, cfg), std::invalid_argument);
}
