// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Expected values come from independent oracles computed
// in this file (brute-force term sums, dense eigensolvers, exhaustive
// search), not from the library code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lse/harness.hpp"
#include "lse/risk.hpp"
#include "lse/solver.hpp"

using namespace lse;

namespace {

// ---------------------------------------------------------------- oracles

Image rand_image(int m, int n, std::mt19937_64& rng, double lo = 0.0,
                 double hi = 255.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd v(static_cast<Eigen::Index>(m) * n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
  return Image(m, n, std::move(v));
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

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1.0});
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ------------------------------------------------------------- criteria

bool tv_norm_oracle_equivalence(std::string& detail) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    for (const auto& [m, n] : {std::pair{4, 4}, {5, 7}}) {
      const Image x = rand_image(m, n, rng);
      for (TvFlavor f : {TvFlavor::Isotropic, TvFlavor::Anisotropic}) {
        const double got = tv_norm(x, f);
        const double want = tv_oracle(x, f);
        if (std::abs(got - want) > 1e-12 * std::max(std::abs(want), 1.0)) {
          detail = "tv_norm " + std::to_string(got) + " vs oracle " +
                   std::to_string(want);
          return false;
        }
      }
    }
  }
  return true;
}

bool adjoint_identity(std::string& detail) {
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 7);
    const int n = 2 + static_cast<int>(rng() % 7);
    const Image x = rand_image(m, n, rng, -1.0, 1.0);
    DualField f;
    f.rows = m;
    f.cols = n;
    f.vertical = Eigen::VectorXd::NullaryExpr(
        static_cast<Eigen::Index>(m - 1) * n, [&] { return dist(rng); });
    f.horizontal = Eigen::VectorXd::NullaryExpr(
        static_cast<Eigen::Index>(m) * (n - 1), [&] { return dist(rng); });
    const DualField dx = forward_differences(x);
    const double lhs =
        dx.vertical.dot(f.vertical) + dx.horizontal.dot(f.horizontal);
    const double rhs = x.pixels().dot(divergence_adjoint(f).pixels());
    if (!close_rel(lhs, rhs, 1e-12)) {
      detail = "inner products " + std::to_string(lhs) + " vs " +
               std::to_string(rhs);
      return false;
    }
  }
  return true;
}

bool two_pixel_prox(std::string& detail) {
  Eigen::VectorXd b(2);
  b << 0.0, 4.0;
  const Image u = tv_prox(Image(2, 1, b), 1.0, TvFlavor::Anisotropic, 300, 1e-14);
  // closed form: both endpoints move toward each other by the weight
  if (std::abs(u.pixels()[0] - 1.0) > 1e-6 ||
      std::abs(u.pixels()[1] - 3.0) > 1e-6) {
    detail = "got [" + std::to_string(u.pixels()[0]) + ", " +
             std::to_string(u.pixels()[1]) + "], want [1, 3]";
    return false;
  }
  return true;
}

bool prox_optimality_certificate(std::string& detail) {
  std::mt19937_64 rng(2026);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    const Image b = rand_image(8, 8, rng);
    for (double weight : {0.1, 1.0, 10.0}) {
      const Image u = tv_prox(b, weight, TvFlavor::Isotropic, 500, 1e-12);
      const double base = weight * tv_oracle(u, TvFlavor::Isotropic) +
                          0.5 * (u.pixels() - b.pixels()).squaredNorm();
      for (int pert = 0; pert < 200; ++pert) {
        Eigen::VectorXd delta(u.size());
        for (Eigen::Index i = 0; i < delta.size(); ++i) delta[i] = gauss(rng);
        delta *= 1e-3 / delta.norm();
        const Image v(8, 8, u.pixels() + delta);
        const double perturbed = weight * tv_oracle(v, TvFlavor::Isotropic) +
                                 0.5 * (v.pixels() - b.pixels()).squaredNorm();
        if (base > perturbed + 1e-8) {
          detail = "objective " + std::to_string(base) +
                   " beaten by perturbation " + std::to_string(perturbed) +
                   " at weight " + std::to_string(weight);
          return false;
        }
      }
    }
  }
  return true;
}

bool lipschitz_oracle(std::string& detail) {
  std::mt19937_64 rng(2027);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng() % 19);   // <= 20
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng() % 49);   // <= 50
    Eigen::MatrixXd a(k, p);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = dist(rng);
    const SensingOperator op(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.transpose() * a);
    const double expected = 1.001 * eig.eigenvalues().maxCoeff();
    const LipschitzEstimate est = estimate_lipschitz(op, 1e-12, 100000);
    if (!close_rel(est.value, expected, 1e-4)) {
      detail = "estimate " + std::to_string(est.value) + " vs eigensolver " +
               std::to_string(expected) + " for " + std::to_string(k) + "x" +
               std::to_string(p);
      return false;
    }
  }
  return true;
}

bool empirical_risk_minimizer(std::string& detail) {
  std::mt19937_64 rng(2028);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = 3, cols = 4;  // p = 12
    const int p = rows * cols;
    Eigen::VectorXd y(p);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = dist(rng);
    const double gamma = dist(rng);

    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_bits = 0;
    for (std::uint32_t bits = 0; bits < (1u << p); ++bits) {
      double risk = 0.0;
      for (int i = 0; i < p; ++i) {
        risk += (gamma - y[i]) * (((bits >> i) & 1u) ? 1.0 : -1.0);
      }
      if (risk < best) {
        best = risk;
        best_bits = bits;
      }
    }
    const LevelSetMask mask = threshold_baseline(y, gamma, rows, cols);
    for (int i = 0; i < p; ++i) {
      const bool want = ((best_bits >> i) & 1u) != 0;
      if (mask.contains(static_cast<std::size_t>(i)) != want) {
        detail = "mask differs from exhaustive minimizer at pixel " +
                 std::to_string(i);
        return false;
      }
    }
  }
  return true;
}

bool solver_fixed_point(std::string& detail) {
  const Image truth = render_phantom(default_phantom());
  const Eigen::Index p = truth.size();
  const SensingOperator op = generate_gaussian_operator(p / 2, p, 11);
  const MeasurementSet meas = measure(op, truth.pixels(), 0.0, 12);

  SolverConfig cfg;
  cfg.alpha = 1.0;
  cfg.level = LevelSpec(70.0, 65.0, 255.0);
  cfg.rows = truth.rows();
  cfg.cols = truth.cols();
  cfg.max_iters = 2000;
  const SolverResult res = solve(op, meas, cfg);
  if (!res.converged) {
    detail = "solver did not converge within " + std::to_string(cfg.max_iters) +
             " iterations";
    return false;
  }
  const Eigen::VectorXd& xhat = res.estimate.pixels();
  if (xhat.minCoeff() < 65.0 || xhat.maxCoeff() > 255.0) {
    detail = "estimate leaves the box [65, 255]";
    return false;
  }
  const double rho = 1.0 / op.lipschitz();
  const Image prox = tv_prox(
      reshape_to_image(gradient_step(op, meas.y, xhat, rho), cfg.rows,
                       cfg.cols),
      cfg.alpha * rho, cfg.flavor, cfg.inner_iters, cfg.inner_tol);
  const Eigen::VectorXd mapped = project_box(prox.pixels(), 65.0, 255.0);
  const double residual = (xhat - mapped).norm() / std::max(1.0, xhat.norm());
  if (residual > 10.0 * cfg.rel_tol) {
    detail = "fixed-point residual " + std::to_string(residual) + " > " +
             std::to_string(10.0 * cfg.rel_tol);
    return false;
  }
  return true;
}

bool compressive_ordering(std::string& detail) {
  const ExperimentGrid grid = make_default_grid();
  const Eigen::Index p = resolve_image(grid).size();
  for (Eigen::Index k : {p / 4, p / 2}) {
    const GridCellResult tv = run_cell(grid, k, 0.0, std::string(kMethodTv));
    const GridCellResult proxy =
        run_cell(grid, k, 0.0, std::string(kMethodProxyThreshold));
    if (tv.failed || proxy.failed) {
      detail = "cell failed at k=" + std::to_string(k);
      return false;
    }
    if (!(tv.excess_risk < 0.5 * proxy.excess_risk)) {
      detail = "k=" + std::to_string(k) + ": tv " +
               std::to_string(tv.excess_risk) + " !< 0.5 * proxy " +
               std::to_string(proxy.excess_risk);
      return false;
    }
  }
  return true;
}

bool noise_free_recovery(std::string& detail) {
  const ExperimentGrid grid = make_default_grid();
  const Eigen::Index p = resolve_image(grid).size();
  const GridCellResult cell = run_cell(grid, p, 0.0, std::string(kMethodTv));
  if (cell.failed) {
    detail = "cell failed";
    return false;
  }
  if (!(cell.excess_risk <= 1e-3)) {
    detail = "excess risk " + std::to_string(cell.excess_risk) + " > 1e-3";
    return false;
  }
  return true;
}

bool noisy_majority(std::string& detail) {
  const ExperimentGrid grid = make_default_grid();
  const Eigen::Index p = resolve_image(grid).size();
  int wins = 0;
  std::string per_rep;
  for (int r = 0; r < 5; ++r) {
    const GridCellResult tv =
        run_cell(grid, p, 10.0, std::string(kMethodTv), r);
    const GridCellResult proxy =
        run_cell(grid, p, 10.0, std::string(kMethodProxyThreshold), r);
    if (tv.failed || proxy.failed) {
      detail = "cell failed at replicate " + std::to_string(r);
      return false;
    }
    if (tv.excess_risk < proxy.excess_risk) ++wins;
    per_rep += " r" + std::to_string(r) + ": tv=" +
               std::to_string(tv.excess_risk) + " proxy=" +
               std::to_string(proxy.excess_risk);
  }
  if (wins < 4) {
    detail = "tv beat proxy in only " + std::to_string(wins) + "/5:" + per_rep;
    return false;
  }
  return true;
}

bool sweep_determinism(std::string& detail) {
  const auto base = std::filesystem::temp_directory_path() / "lse_acceptance";
  const auto dir1 = base / "sweep1";
  const auto dir2 = base / "sweep2";
  std::filesystem::remove_all(base);
  const ExperimentGrid grid = make_default_grid();
  const int rc1 = run_grid(grid, dir1);
  const ExperimentGrid replay = grid_from_manifest(dir1 / "manifest.json");
  const int rc2 = run_grid(replay, dir2);
  if (rc1 != 0 || rc2 != 0) {
    detail = "sweep exit codes " + std::to_string(rc1) + ", " +
             std::to_string(rc2);
    return false;
  }
  const std::string a = read_bytes(dir1 / "results.csv");
  const std::string b = read_bytes(dir2 / "results.csv");
  if (a.empty() || a != b) {
    detail = "results.csv differs between executions";
    return false;
  }
  std::filesystem::remove_all(base);
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "tv_norm matches brute-force term sums (1e-12 rel)",
       tv_norm_oracle_equivalence},
      {2, "forward-difference/adjoint inner-product identity (1e-12 rel)",
       adjoint_identity},
      {3, "two-pixel anisotropic prox closed form (1e-6)", two_pixel_prox},
      {4, "prox optimality certificate vs 200 perturbations (slack 1e-8)",
       prox_optimality_certificate},
      {5, "lipschitz estimate matches dense eigensolver (1e-4 rel)",
       lipschitz_oracle},
      {6, "threshold baseline equals exhaustive risk minimizer (p=12)",
       empirical_risk_minimizer},
      {7, "solver fixed point and box feasibility on the default phantom",
       solver_fixed_point},
      {8, "clairvoyant tv risk < 0.5x proxy risk at k=p/4, p/2 (sigma 0)",
       compressive_ordering},
      {9, "noise-free full-measurement recovery, excess risk <= 1e-3",
       noise_free_recovery},
      {10, "tv beats proxy at k=p, sigma 10 in >= 4 of 5 replicates",
       noisy_majority},
      {11, "full default sweep reruns byte-identically from its manifest",
       sweep_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.check(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] %2d. %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", c.id,
                c.name, secs, detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu acceptance criteria failed\n", failures,
                criteria.size());
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return 0;
}
