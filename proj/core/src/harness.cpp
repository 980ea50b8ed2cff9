#include "lse/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lse/risk.hpp"
#include "lse/solver.hpp"

namespace lse {

namespace {

using nlohmann::json;

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool known_method(const std::string& m) {
  return m == kMethodTv || m == kMethodProxyThreshold;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, Eigen::Index k,
                          double sigma, std::string_view label) {
  std::uint64_t h = 14695981039346656037ULL;  // FNV-1a offset basis
  const auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;  // FNV-1a prime
    }
  };
  const std::uint64_t k_bits = static_cast<std::uint64_t>(k);
  std::int64_t sigma_fixed;  // microunit fixed point, saturated
  if (std::isnan(sigma)) {
    sigma_fixed = std::numeric_limits<std::int64_t>::min();
  } else if (sigma >= 9e12) {
    sigma_fixed = std::numeric_limits<std::int64_t>::max();
  } else if (sigma <= -9e12) {
    sigma_fixed = std::numeric_limits<std::int64_t>::min() + 1;
  } else {
    sigma_fixed = std::llround(sigma * 1e6);
  }
  mix(&base_seed, sizeof(base_seed));
  mix(&k_bits, sizeof(k_bits));
  mix(&sigma_fixed, sizeof(sigma_fixed));
  mix(label.data(), label.size());
  // splitmix64 finisher for avalanche
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

Image resolve_image(const ExperimentGrid& grid) {
  if (const auto* spec = std::get_if<PhantomSpec>(&grid.image_source)) {
    return render_phantom(*spec);
  }
  return load_image(std::get<std::filesystem::path>(grid.image_source));
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw std::invalid_argument("log_spaced: requires 0 < lo < hi, count >= 2");
  }
  std::vector<double> values(static_cast<std::size_t>(count));
  const double step = (std::log10(hi) - std::log10(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) {
    values[static_cast<std::size_t>(i)] = std::pow(10.0, std::log10(lo) + i * step);
  }
  values.front() = lo;
  values.back() = hi;
  return values;
}

ExperimentGrid make_default_grid() {
  ExperimentGrid grid;
  grid.image_source = default_phantom();
  const Eigen::Index p = static_cast<Eigen::Index>(default_phantom().rows) *
                         default_phantom().cols;
  grid.gamma = 70.0;
  grid.k_values = {p, p / 2, p / 4};
  grid.sigma_values = {0.0, 10.0};
  grid.alpha_grid = log_spaced(1e-3, 1e2, 12);
  grid.methods = {std::string(kMethodTv), std::string(kMethodProxyThreshold)};
  return grid;
}

GridCellResult run_cell(const ExperimentGrid& grid, Eigen::Index k,
                        double sigma, const std::string& method,
                        int replicate) {
  if (!known_method(method)) {
    throw std::invalid_argument("run_cell: unknown method '" + method + "'");
  }
  if (replicate < 0) {
    throw std::invalid_argument("run_cell: replicate must be >= 0");
  }
  const Image truth = resolve_image(grid);
  const Eigen::Index p = truth.size();
  if (k < 1 || k > p) {
    throw std::invalid_argument("run_cell: k must be in [1, p]");
  }

  const std::string rep = std::to_string(replicate);
  const std::uint64_t matrix_seed =
      derive_seed(grid.base_seed, k, sigma, "matrix:" + rep);
  const std::uint64_t noise_seed =
      derive_seed(grid.base_seed, k, sigma, "noise:" + rep);

  GridCellResult cell;
  cell.k = k;
  cell.sigma = sigma;
  cell.method = method;
  cell.seed = noise_seed;

  const SensingOperator op = generate_gaussian_operator(k, p, matrix_seed);
  const MeasurementSet meas = measure(op, truth.pixels(), sigma, noise_seed);
  const LevelSetMask true_set = extract_level_set(truth, grid.gamma);

  const auto start = std::chrono::steady_clock::now();
  if (method == kMethodProxyThreshold) {
    const Eigen::VectorXd z = proxy_observations(op, meas);
    cell.mask = threshold_baseline(z, grid.gamma, truth.rows(), truth.cols());
    cell.converged = true;
  } else {
    if (grid.alpha_grid.empty()) {
      throw std::invalid_argument("run_cell: alpha grid is empty");
    }
    double best_risk = std::numeric_limits<double>::infinity();
    try {
      for (double alpha : grid.alpha_grid) {
        SolverConfig cfg;
        cfg.alpha = alpha;
        cfg.level =
            LevelSpec(grid.gamma, grid.resolved_lower(), grid.resolved_upper());
        cfg.rows = truth.rows();
        cfg.cols = truth.cols();
        cfg.max_iters = grid.max_iters;
        cfg.rel_tol = grid.rel_tol;
        cfg.inner_iters = grid.inner_iters;
        cfg.inner_tol = grid.inner_tol;
        cfg.flavor = grid.flavor;
        const SolverResult res = solve(op, meas, cfg);
        const LevelSetMask mask = extract_level_set(res.estimate, grid.gamma);
        const double risk = excess_risk(truth, grid.gamma, mask);
        if (risk < best_risk) {  // ties keep the smallest alpha
          best_risk = risk;
          cell.best_alpha = alpha;
          cell.iterations = res.iterations;
          cell.converged = res.converged;
          cell.mask = mask;
        }
      }
    } catch (const NumericalFailure& e) {
      cell.failed = true;
      cell.failure = e.what();
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  cell.wall_time_ms =
      std::chrono::duration<double, std::milli>(stop - start).count();

  if (cell.failed) {
    cell.excess_risk = std::numeric_limits<double>::quiet_NaN();
    cell.best_alpha.reset();
    cell.iterations = 0;
    cell.converged = false;
    cell.mask = LevelSetMask();
  } else {
    cell.excess_risk = excess_risk(truth, grid.gamma, cell.mask);
    cell.sym_diff_size = symmetric_difference(true_set, cell.mask).count();
  }
  return cell;
}

namespace {

void validate_grid(const ExperimentGrid& grid, Eigen::Index p) {
  if (grid.methods.empty()) {
    throw std::invalid_argument("run_grid: methods list is empty");
  }
  for (const auto& m : grid.methods) {
    if (!known_method(m)) {
      throw std::invalid_argument("run_grid: unknown method '" + m + "'");
    }
  }
  if (grid.k_values.empty()) {
    throw std::invalid_argument("run_grid: k_values is empty");
  }
  for (Eigen::Index k : grid.k_values) {
    if (k < 1 || k > p) {
      throw std::invalid_argument("run_grid: every k must be in [1, p]");
    }
  }
  if (grid.sigma_values.empty()) {
    throw std::invalid_argument("run_grid: sigma_values is empty");
  }
  for (double s : grid.sigma_values) {
    if (std::isnan(s) || s < 0.0) {
      throw std::invalid_argument("run_grid: sigma values must be >= 0");
    }
  }
  if (grid.alpha_grid.empty()) {
    throw std::invalid_argument("run_grid: alpha_grid is empty");
  }
  if (!std::is_sorted(grid.alpha_grid.begin(), grid.alpha_grid.end())) {
    throw std::invalid_argument("run_grid: alpha_grid must be sorted ascending");
  }
  if (grid.alpha_grid.front() <= 0.0) {
    throw std::invalid_argument("run_grid: alphas must be > 0");
  }
  if (grid.replicates < 1) {
    throw std::invalid_argument("run_grid: replicates must be >= 1");
  }
}

std::string sigma_token(double sigma) {
  std::string s = format_g9(sigma);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '+') c = '_';
    if (c == '-') c = 'm';
  }
  return s;
}

json grid_to_json(const ExperimentGrid& grid) {
  json j;
  if (const auto* spec = std::get_if<PhantomSpec>(&grid.image_source)) {
    j["image_source"] = {{"phantom", json::parse(phantom_spec_to_json(*spec))}};
  } else {
    j["image_source"] = {
        {"path", std::get<std::filesystem::path>(grid.image_source).string()}};
  }
  j["gamma"] = grid.gamma;
  j["lower"] = grid.resolved_lower();
  j["upper"] = grid.resolved_upper();
  j["k_values"] = grid.k_values;
  j["sigma_values"] = grid.sigma_values;
  j["alpha_grid"] = grid.alpha_grid;
  j["base_seed"] = grid.base_seed;
  j["methods"] = grid.methods;
  j["replicates"] = grid.replicates;
  j["tv_flavor"] =
      grid.flavor == TvFlavor::Isotropic ? "isotropic" : "anisotropic";
  j["max_iters"] = grid.max_iters;
  j["rel_tol"] = grid.rel_tol;
  j["inner_iters"] = grid.inner_iters;
  j["inner_tol"] = grid.inner_tol;
  return j;
}

ExperimentGrid grid_from_json(const json& j) {
  ExperimentGrid grid;
  const json& src = j.at("image_source");
  if (src.contains("phantom")) {
    grid.image_source = phantom_spec_from_json(src.at("phantom").dump());
  } else {
    grid.image_source =
        std::filesystem::path(src.at("path").get<std::string>());
  }
  grid.gamma = j.at("gamma").get<double>();
  grid.lower = j.at("lower").get<double>();
  grid.upper = j.at("upper").get<double>();
  grid.k_values.clear();
  for (const auto& k : j.at("k_values")) {
    grid.k_values.push_back(k.get<Eigen::Index>());
  }
  grid.sigma_values = j.at("sigma_values").get<std::vector<double>>();
  grid.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  grid.base_seed = j.at("base_seed").get<std::uint64_t>();
  grid.methods = j.at("methods").get<std::vector<std::string>>();
  grid.replicates = j.at("replicates").get<int>();
  grid.flavor = j.at("tv_flavor").get<std::string>() == "anisotropic"
                    ? TvFlavor::Anisotropic
                    : TvFlavor::Isotropic;
  grid.max_iters = j.at("max_iters").get<int>();
  grid.rel_tol = j.at("rel_tol").get<double>();
  grid.inner_iters = j.at("inner_iters").get<int>();
  grid.inner_tol = j.at("inner_tol").get<double>();
  return grid;
}

}  // namespace

int run_grid(const ExperimentGrid& grid,
             const std::filesystem::path& out_dir) {
  const Image truth = resolve_image(grid);
  validate_grid(grid, truth.size());
  std::filesystem::create_directories(out_dir);

  save_image(truth, out_dir / "truth.pgm");
  const LevelSetMask true_set = extract_level_set(truth, grid.gamma);
  save_mask(true_set, out_dir / "mask_true.pgm");

  std::ostringstream csv;
  csv << "k,sigma,method,alpha,excess_risk,sym_diff_size,iterations,"
         "converged,wall_time_ms,seed\n";

  json cells = json::array();
  int failed_cells = 0;

  for (Eigen::Index k : grid.k_values) {
    for (double sigma : grid.sigma_values) {
      for (const std::string& method : grid.methods) {
        std::vector<GridCellResult> reps;
        reps.reserve(static_cast<std::size_t>(grid.replicates));
        for (int r = 0; r < grid.replicates; ++r) {
          reps.push_back(run_cell(grid, k, sigma, method, r));
        }
        const bool any_failed =
            std::any_of(reps.begin(), reps.end(),
                        [](const GridCellResult& c) { return c.failed; });
        const auto& first = reps.front();

        // Replicates are averaged into one row; alpha, seed, and the
        // exported mask come from replicate 0.
        double mean_risk = 0.0, mean_sym = 0.0, mean_iters = 0.0;
        bool all_converged = true;
        for (const auto& c : reps) {
          mean_risk += c.excess_risk;
          mean_sym += static_cast<double>(c.sym_diff_size);
          mean_iters += static_cast<double>(c.iterations);
          all_converged = all_converged && c.converged;
        }
        const double n = static_cast<double>(reps.size());
        mean_risk /= n;
        mean_sym /= n;
        mean_iters /= n;

        std::string mask_file;
        if (!any_failed) {
          mask_file = "mask_" + method + "_k" + std::to_string(k) + "_s" +
                      sigma_token(sigma) + ".pgm";
          save_mask(first.mask, out_dir / mask_file);
        } else {
          ++failed_cells;
          mean_risk = std::numeric_limits<double>::quiet_NaN();
          mean_sym = std::numeric_limits<double>::quiet_NaN();
          mean_iters = 0.0;
          all_converged = false;
        }

        csv << k << ',' << format_g9(sigma) << ',' << method << ',';
        if (!any_failed && first.best_alpha) {
          csv << format_g9(*first.best_alpha);
        }
        csv << ',' << format_g9(mean_risk) << ',' << format_g9(mean_sym)
            << ',' << format_g9(mean_iters) << ',' << (all_converged ? 1 : 0)
            // Wall time lives in the manifest; a fixed 0 here keeps
            // results.csv byte-reproducible across runs.
            << ',' << format_g9(0.0) << ',' << first.seed << '\n';

        json cell;
        cell["k"] = k;
        cell["sigma"] = sigma;
        cell["method"] = method;
        cell["failed"] = any_failed;
        if (any_failed) {
          for (const auto& c : reps) {
            if (c.failed) {
              cell["failure"] = c.failure;
              break;
            }
          }
        }
        if (!mask_file.empty()) cell["mask_file"] = mask_file;
        json rep_list = json::array();
        for (int r = 0; r < grid.replicates; ++r) {
          const auto& c = reps[static_cast<std::size_t>(r)];
          json jr;
          jr["replicate"] = r;
          jr["matrix_seed"] =
              derive_seed(grid.base_seed, k, sigma, "matrix:" + std::to_string(r));
          jr["noise_seed"] = c.seed;
          jr["wall_time_ms"] = c.wall_time_ms;
          if (!c.failed) {
            jr["excess_risk"] = c.excess_risk;
            jr["sym_diff_size"] = c.sym_diff_size;
            jr["iterations"] = c.iterations;
            jr["converged"] = c.converged;
            if (c.best_alpha) jr["alpha"] = *c.best_alpha;
          }
          rep_list.push_back(std::move(jr));
        }
        cell["replicates"] = std::move(rep_list);
        cells.push_back(std::move(cell));
      }
    }
  }

  {
    std::ofstream out(out_dir / "results.csv", std::ios::binary);
    if (!out) {
      throw std::runtime_error("run_grid: cannot write results.csv");
    }
    out << csv.str();
  }
  {
    json manifest;
    manifest["format"] = "lse-sweep-manifest v1";
    manifest["grid"] = grid_to_json(grid);
    manifest["artifacts"] = {{"results", "results.csv"},
                             {"truth_image", "truth.pgm"},
                             {"true_mask", "mask_true.pgm"}};
    manifest["cells"] = std::move(cells);
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    if (!out) {
      throw std::runtime_error("run_grid: cannot write manifest.json");
    }
    out << manifest.dump(2) << '\n';
  }

  return failed_cells > 0 ? 2 : 0;
}

ExperimentGrid grid_from_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw std::runtime_error("grid_from_manifest: cannot open " +
                             manifest_path.string());
  }
  json manifest;
  try {
    in >> manifest;
    return grid_from_json(manifest.at("grid"));
  } catch (const json::exception& e) {
    throw std::runtime_error("grid_from_manifest: " + manifest_path.string() +
                             ": " + e.what());
  }
}

void save_measurements(const MeasurementSet& meas, int rows, int cols,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_measurements: cannot open " +
                             path.string());
  }
  out << "lse-meas 1\n";
  out << "rows " << rows << " cols " << cols << "\n";
  out << "k " << meas.y.size() << " sigma " << format_full(meas.sigma)
      << " seed " << meas.seed << "\n";
  for (Eigen::Index i = 0; i < meas.y.size(); ++i) {
    out << format_full(meas.y[i]) << "\n";
  }
  if (!out) {
    throw std::runtime_error("save_measurements: write failed for " +
                             path.string());
  }
}

LoadedMeasurements load_measurements(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_measurements: cannot open " +
                             path.string());
  }
  const auto expect = [&](const std::string& want) {
    std::string got;
    if (!(in >> got) || got != want) {
      throw std::runtime_error("load_measurements: " + path.string() +
                               ": expected token '" + want + "'");
    }
  };
  expect("lse-meas");
  int version = 0;
  in >> version;
  if (!in || version != 1) {
    throw std::runtime_error("load_measurements: " + path.string() +
                             ": unsupported version");
  }
  LoadedMeasurements loaded;
  Eigen::Index k = 0;
  expect("rows");
  in >> loaded.rows;
  expect("cols");
  in >> loaded.cols;
  expect("k");
  in >> k;
  expect("sigma");
  in >> loaded.meas.sigma;
  expect("seed");
  in >> loaded.meas.seed;
  if (!in || loaded.rows <= 0 || loaded.cols <= 0 || k <= 0) {
    throw std::runtime_error("load_measurements: " + path.string() +
                             ": malformed header");
  }
  loaded.meas.y.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(in >> loaded.meas.y[i])) {
      throw std::runtime_error("load_measurements: " + path.string() +
                               ": truncated at value " + std::to_string(i));
    }
  }
  return loaded;
}

}  // namespace lse
