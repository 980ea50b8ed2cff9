// lse: compressive level-set estimation via box-constrained TV minimization.
//
// Subcommands: phantom, sense, solve, baseline, evaluate, sweep.
// Exit codes: 0 success, 1 validation error, 2 partial sweep cell failures.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lse/harness.hpp"
#include "lse/risk.hpp"
#include "lse/solver.hpp"

namespace {

using namespace lse;

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

TvFlavor parse_flavor(const std::string& name) {
  if (name == "iso") return TvFlavor::Isotropic;
  if (name == "aniso") return TvFlavor::Anisotropic;
  throw CLI::ValidationError("--tv", "expected 'iso' or 'aniso'");
}

int cmd_phantom(const std::optional<std::string>& spec_path,
                const std::string& out, const std::optional<double>& gamma,
                const std::optional<std::string>& mask_out) {
  const PhantomSpec spec =
      spec_path ? load_phantom_spec(*spec_path) : default_phantom();
  const Image img = render_phantom(spec);
  save_image(img, out);
  std::cout << "wrote " << out << " (" << img.rows() << "x" << img.cols()
            << ")\n";
  if (mask_out) {
    if (!gamma) {
      throw CLI::ValidationError("--mask-out", "requires --gamma");
    }
    save_mask(extract_level_set(img, *gamma), *mask_out);
    std::cout << "wrote " << *mask_out << " (gamma " << g9(*gamma) << ")\n";
  }
  return 0;
}

int cmd_sense(const std::string& image_path, Eigen::Index k, double sigma,
              std::uint64_t matrix_seed, std::uint64_t noise_seed,
              const std::string& out_operator,
              const std::string& out_measurements) {
  const Image img = load_image(image_path);
  const SensingOperator op =
      generate_gaussian_operator(k, img.size(), matrix_seed);
  const MeasurementSet meas = measure(op, img.pixels(), sigma, noise_seed);
  save_operator(op, out_operator);
  save_measurements(meas, img.rows(), img.cols(), out_measurements);
  std::cout << "sensed " << image_path << ": k=" << k << " p=" << img.size()
            << " sigma=" << g9(sigma) << "\n"
            << "wrote " << out_operator << ", " << out_measurements << "\n";
  return 0;
}

int cmd_solve(const std::string& operator_path,
              const std::string& measurements_path, double alpha, double gamma,
              std::optional<double> lower, std::optional<double> upper,
              int max_iters, double rel_tol, int inner_iters, double inner_tol,
              const std::string& flavor,
              const std::optional<std::string>& out,
              const std::optional<std::string>& mask_out) {
  const SensingOperator op = load_operator(operator_path);
  const LoadedMeasurements loaded = load_measurements(measurements_path);
  if (loaded.meas.y.size() != op.measurements()) {
    throw std::invalid_argument("measurement count " +
                                std::to_string(loaded.meas.y.size()) +
                                " does not match operator k=" +
                                std::to_string(op.measurements()));
  }
  SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.level = LevelSpec(gamma, lower.value_or(gamma - 5.0),
                        upper.value_or(255.0));
  cfg.rows = loaded.rows;
  cfg.cols = loaded.cols;
  cfg.max_iters = max_iters;
  cfg.rel_tol = rel_tol;
  cfg.inner_iters = inner_iters;
  cfg.inner_tol = inner_tol;
  cfg.flavor = parse_flavor(flavor);

  const SolverResult res = solve(op, loaded.meas, cfg);
  std::cout << "iterations " << res.iterations << "\n"
            << "converged " << (res.converged ? 1 : 0) << "\n"
            << "final_rel_change " << g9(res.final_rel_change) << "\n"
            << "objective " << g9(res.objective_trace.back()) << "\n";
  if (out) {
    save_image(res.estimate, *out);
    std::cout << "wrote " << *out << "\n";
  }
  if (mask_out) {
    save_mask(extract_level_set(res.estimate, gamma), *mask_out);
    std::cout << "wrote " << *mask_out << "\n";
  }
  return 0;
}

int cmd_baseline(const std::string& operator_path,
                 const std::string& measurements_path, double gamma,
                 const std::string& out) {
  const SensingOperator op = load_operator(operator_path);
  const LoadedMeasurements loaded = load_measurements(measurements_path);
  const Eigen::VectorXd z = proxy_observations(op, loaded.meas);
  const LevelSetMask mask =
      threshold_baseline(z, gamma, loaded.rows, loaded.cols);
  save_mask(mask, out);
  std::cout << "wrote " << out << " (" << mask.count() << " member pixels)\n";
  return 0;
}

int cmd_evaluate(const std::string& truth_path, const std::string& mask_path,
                 double gamma) {
  const Image truth = load_image(truth_path);
  const Image mask_img = load_image(mask_path);
  const LevelSetMask mask = extract_level_set(mask_img, 128.0);
  const RiskReport report = evaluate(truth, gamma, mask, mask_path, {});
  std::cout << "excess_risk " << g9(report.excess_risk) << "\n"
            << "empirical_risk " << g9(report.empirical_risk) << "\n"
            << "sym_diff_size " << report.sym_diff_size << "\n";
  return 0;
}

int cmd_sweep(const std::optional<std::string>& spec_path,
              const std::optional<std::string>& image_path,
              const std::optional<std::string>& from_manifest, double gamma,
              const std::vector<double>& k_fracs,
              const std::vector<double>& sigmas,
              const std::vector<double>& alphas, std::uint64_t seed,
              const std::vector<std::string>& methods, int replicates,
              std::optional<double> lower, std::optional<double> upper,
              const std::string& flavor, int max_iters, double rel_tol,
              int inner_iters, double inner_tol, const std::string& out_dir) {
  ExperimentGrid grid;
  if (from_manifest) {
    grid = grid_from_manifest(*from_manifest);
  } else {
    if (spec_path && image_path) {
      throw CLI::ValidationError("--spec/--image", "give at most one source");
    }
    if (spec_path) {
      grid.image_source = load_phantom_spec(*spec_path);
    } else if (image_path) {
      grid.image_source = std::filesystem::path(*image_path);
    }
    grid.gamma = gamma;
    const Eigen::Index p = resolve_image(grid).size();
    for (double frac : k_fracs) {
      if (!(frac > 0.0) || frac > 1.0) {
        throw CLI::ValidationError("--k-fracs", "fractions must be in (0, 1]");
      }
      grid.k_values.push_back(std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::llround(frac * static_cast<double>(p)))));
    }
    grid.sigma_values = sigmas;
    grid.alpha_grid = alphas.empty() ? log_spaced(1e-3, 1e2, 12) : alphas;
    grid.base_seed = seed;
    grid.methods = methods;
    grid.replicates = replicates;
    grid.lower = lower;
    grid.upper = upper;
    grid.flavor = parse_flavor(flavor);
    grid.max_iters = max_iters;
    grid.rel_tol = rel_tol;
    grid.inner_iters = inner_iters;
    grid.inner_tol = inner_tol;
  }
  const int rc = run_grid(grid, out_dir);
  std::cout << "wrote " << (std::filesystem::path(out_dir) / "results.csv").string()
            << (rc == 2 ? " (with failed cells)" : "") << "\n";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressive level-set estimation toolkit"};
  app.require_subcommand(1);

  // phantom
  auto* phantom = app.add_subcommand(
      "phantom", "render the default or a spec-file phantom to PGM");
  std::optional<std::string> ph_spec;
  std::string ph_out;
  std::optional<double> ph_gamma;
  std::optional<std::string> ph_mask_out;
  phantom->add_option("--spec", ph_spec, "phantom spec JSON file");
  phantom->add_option("--out", ph_out, "output PGM path")->required();
  phantom->add_option("--gamma", ph_gamma, "level threshold for --mask-out");
  phantom->add_option("--mask-out", ph_mask_out, "true level-set mask PGM");

  // sense
  auto* sense = app.add_subcommand(
      "sense", "generate a Gaussian operator and noisy measurements");
  std::string sn_image, sn_out_op, sn_out_meas;
  Eigen::Index sn_k = 0;
  double sn_sigma = 0.0;
  std::uint64_t sn_matrix_seed = 1, sn_noise_seed = 2;
  sense->add_option("--image", sn_image, "input PGM image")->required();
  sense->add_option("--k", sn_k, "number of measurements")->required();
  sense->add_option("--sigma", sn_sigma, "noise standard deviation");
  sense->add_option("--matrix-seed", sn_matrix_seed, "operator seed");
  sense->add_option("--noise-seed", sn_noise_seed, "noise seed");
  sense->add_option("--out-operator", sn_out_op, "operator dump path")
      ->required();
  sense->add_option("--out-measurements", sn_out_meas, "measurement file path")
      ->required();

  // solve
  auto* solve_cmd = app.add_subcommand(
      "solve", "box-constrained TV solve of one measurement set");
  std::string sv_op, sv_meas, sv_flavor = "iso";
  double sv_alpha = 0.0, sv_gamma = 0.0, sv_rel_tol = 1e-4,
         sv_inner_tol = 1e-5;
  std::optional<double> sv_lower, sv_upper;
  int sv_max_iters = 500, sv_inner_iters = 50;
  std::optional<std::string> sv_out, sv_mask_out;
  solve_cmd->add_option("--operator", sv_op, "operator dump")->required();
  solve_cmd->add_option("--measurements", sv_meas, "measurement file")
      ->required();
  solve_cmd->add_option("--alpha", sv_alpha, "TV regularization weight")
      ->required();
  solve_cmd->add_option("--gamma", sv_gamma, "level threshold")->required();
  solve_cmd->add_option("--lower", sv_lower, "box lower bound (default gamma-5)");
  solve_cmd->add_option("--upper", sv_upper, "box upper bound (default 255)");
  solve_cmd->add_option("--max-iters", sv_max_iters, "iteration cap");
  solve_cmd->add_option("--rel-tol", sv_rel_tol, "relative change tolerance");
  solve_cmd->add_option("--inner-iters", sv_inner_iters, "TV prox iterations");
  solve_cmd->add_option("--inner-tol", sv_inner_tol, "TV prox tolerance");
  solve_cmd->add_option("--tv", sv_flavor, "TV flavor: iso|aniso");
  solve_cmd->add_option("--out", sv_out, "estimate PGM path");
  solve_cmd->add_option("--mask-out", sv_mask_out, "level-set mask PGM path");

  // baseline
  auto* baseline = app.add_subcommand(
      "baseline", "proxy-thresholding baseline z = A^T y >= gamma");
  std::string bl_op, bl_meas, bl_out;
  double bl_gamma = 0.0;
  baseline->add_option("--operator", bl_op, "operator dump")->required();
  baseline->add_option("--measurements", bl_meas, "measurement file")
      ->required();
  baseline->add_option("--gamma", bl_gamma, "level threshold")->required();
  baseline->add_option("--out", bl_out, "mask PGM path")->required();

  // evaluate
  auto* eval = app.add_subcommand(
      "evaluate", "excess/empirical risk of a mask against the truth");
  std::string ev_truth, ev_mask;
  double ev_gamma = 0.0;
  eval->add_option("--truth", ev_truth, "truth PGM image")->required();
  eval->add_option("--mask", ev_mask, "estimate mask PGM")->required();
  eval->add_option("--gamma", ev_gamma, "level threshold")->required();

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "full (k, sigma) grid with clairvoyant alpha selection");
  std::optional<std::string> sw_spec, sw_image, sw_manifest;
  double sw_gamma = 70.0, sw_rel_tol = 1e-4, sw_inner_tol = 1e-5;
  std::vector<double> sw_k_fracs = {1.0, 0.5, 0.25};
  std::vector<double> sw_sigmas = {0.0, 10.0};
  std::vector<double> sw_alphas;
  std::uint64_t sw_seed = 7;
  std::vector<std::string> sw_methods = {std::string(kMethodTv),
                                         std::string(kMethodProxyThreshold)};
  int sw_replicates = 1, sw_max_iters = 500, sw_inner_iters = 50;
  std::optional<double> sw_lower, sw_upper;
  std::string sw_flavor = "iso", sw_out;
  sweep->add_option("--spec", sw_spec, "phantom spec JSON source");
  sweep->add_option("--image", sw_image, "PGM image source");
  sweep->add_option("--from-manifest", sw_manifest,
                    "rerun the grid recorded in a manifest.json");
  sweep->add_option("--gamma", sw_gamma, "level threshold");
  sweep->add_option("--k-fracs", sw_k_fracs, "measurement fractions of p")
      ->delimiter(',');
  sweep->add_option("--sigmas", sw_sigmas, "noise levels")->delimiter(',');
  sweep->add_option("--alphas", sw_alphas,
                    "alpha grid (default: 12 log-spaced in [1e-3, 1e2])")
      ->delimiter(',');
  sweep->add_option("--seed", sw_seed, "base seed");
  sweep->add_option("--methods", sw_methods, "tv,proxy-threshold subset")
      ->delimiter(',');
  sweep->add_option("--replicates", sw_replicates,
                    "independent noise draws averaged per cell");
  sweep->add_option("--lower", sw_lower, "box lower bound (default gamma-5)");
  sweep->add_option("--upper", sw_upper, "box upper bound (default 255)");
  sweep->add_option("--tv", sw_flavor, "TV flavor: iso|aniso");
  sweep->add_option("--max-iters", sw_max_iters, "solver iteration cap");
  sweep->add_option("--rel-tol", sw_rel_tol, "solver tolerance");
  sweep->add_option("--inner-iters", sw_inner_iters, "TV prox iterations");
  sweep->add_option("--inner-tol", sw_inner_tol, "TV prox tolerance");
  sweep->add_option("--out", sw_out, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (phantom->parsed()) {
      return cmd_phantom(ph_spec, ph_out, ph_gamma, ph_mask_out);
    }
    if (sense->parsed()) {
      return cmd_sense(sn_image, sn_k, sn_sigma, sn_matrix_seed, sn_noise_seed,
                       sn_out_op, sn_out_meas);
    }
    if (solve_cmd->parsed()) {
      return cmd_solve(sv_op, sv_meas, sv_alpha, sv_gamma, sv_lower, sv_upper,
                       sv_max_iters, sv_rel_tol, sv_inner_iters, sv_inner_tol,
                       sv_flavor, sv_out, sv_mask_out);
    }
    if (baseline->parsed()) {
      return cmd_baseline(bl_op, bl_meas, bl_gamma, bl_out);
    }
    if (eval->parsed()) {
      return cmd_evaluate(ev_truth, ev_mask, ev_gamma);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sw_spec, sw_image, sw_manifest, sw_gamma, sw_k_fracs,
                       sw_sigmas, sw_alphas, sw_seed, sw_methods,
                       sw_replicates, sw_lower, sw_upper, sw_flavor,
                       sw_max_iters, sw_rel_tol, sw_inner_iters, sw_inner_tol,
                       sw_out);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
