#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lse/image.hpp"
#include "lse/phantom.hpp"
#include "lse/sensing.hpp"
#include "lse/tv.hpp"

namespace lse {

inline constexpr std::string_view kMethodTv = "tv";
inline constexpr std::string_view kMethodProxyThreshold = "proxy-threshold";

/// Full description of a measurement sweep: image source, level threshold,
/// the (k, sigma) grid, the clairvoyant alpha grid, and solver settings.
struct ExperimentGrid {
  std::variant<PhantomSpec, std::filesystem::path> image_source =
      default_phantom();
  double gamma = 70.0;
  std::vector<Eigen::Index> k_values;
  std::vector<double> sigma_values;
  std::vector<double> alpha_grid;
  std::uint64_t base_seed = 7;
  std::vector<std::string> methods;
  int replicates = 1;
  std::optional<double> lower;  // defaults to gamma - 5
  std::optional<double> upper;  // defaults to 255
  TvFlavor flavor = TvFlavor::Isotropic;
  int max_iters = 500;
  double rel_tol = 1e-4;
  int inner_iters = 50;
  double inner_tol = 1e-5;

  double resolved_lower() const { return lower.value_or(gamma - 5.0); }
  double resolved_upper() const { return upper.value_or(255.0); }
};

/// One curve point: a (k, sigma, method) cell evaluated against the known
/// truth.
struct GridCellResult {
  Eigen::Index k = 0;
  double sigma = 0.0;
  std::string method;
  std::optional<double> best_alpha;  // absent for thresholding
  double excess_risk = 0.0;
  std::size_t sym_diff_size = 0;
  int iterations = 0;
  bool converged = false;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;  // noise seed of this cell
  LevelSetMask mask;
  bool failed = false;
  std::string failure;
};

/// Deterministic 64-bit seed for one grid cell: FNV-1a over the
/// little-endian encoding of (base_seed, k, sigma in fixed-point
/// microunits, label), finished with the splitmix64 mixer.
std::uint64_t derive_seed(std::uint64_t base_seed, Eigen::Index k,
                          double sigma, std::string_view label);

/// Render or load the grid's truth image.
Image resolve_image(const ExperimentGrid& grid);

/// Count logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int count);

/// Default sweep on the default phantom: gamma 70, k in {p, p/2, p/4},
/// sigma in {0, 10}, 12 log-spaced alphas in [1e-3, 1e2], both methods.
ExperimentGrid make_default_grid();

/// Run one cell. The sensing matrix and noise are drawn from seeds derived
/// with method-independent labels ("matrix:<replicate>", "noise:<replicate>")
/// so every method within a cell sees identical measurements. For "tv" the
/// problem is solved for every alpha in the grid and the minimum-excess-risk
/// alpha is reported (clairvoyant selection); for "proxy-threshold" the
/// proxy z = A^T y is thresholded at gamma. A solver numerical failure marks
/// the cell failed instead of propagating.
GridCellResult run_cell(const ExperimentGrid& grid, Eigen::Index k,
                        double sigma, const std::string& method,
                        int replicate = 0);

/// Run every cell in grid order and write results.csv, per-cell estimated
/// mask PGMs, the true-mask PGM, and manifest.json under out_dir. Returns 0
/// on success, 2 if any cell failed.
int run_grid(const ExperimentGrid& grid, const std::filesystem::path& out_dir);

/// Rebuild the grid recorded by run_grid so a sweep can be rerun exactly.
ExperimentGrid grid_from_manifest(const std::filesystem::path& manifest_path);

/// Text dump of a MeasurementSet plus the image shape it was taken from.
void save_measurements(const MeasurementSet& meas, int rows, int cols,
                       const std::filesystem::path& path);

struct LoadedMeasurements {
  MeasurementSet meas;
  int rows = 0;
  int cols = 0;
};
LoadedMeasurements load_measurements(const std::filesystem::path& path);

}  // namespace lse
