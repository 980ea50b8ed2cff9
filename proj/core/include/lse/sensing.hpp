#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <Eigen/Core>

namespace lse {

struct LipschitzEstimate {
  double value = 0.0;   // lambda_max(A^T A) times the 1.001 safety factor
  bool converged = false;
  int iterations = 0;
};

/// Dense k-by-p measurement operator A with a lazily cached Lipschitz
/// constant L = lambda_max(A^T A). The entries are immutable after
/// construction; the cache is written once.
///
/// apply/apply_adjoint/measurements/dimension form the minimal operator
/// surface the solver depends on, so structured operators can be added
/// later without touching it.
class SensingOperator {
 public:
  explicit SensingOperator(Eigen::MatrixXd entries, std::uint64_t seed = 0);

  Eigen::Index measurements() const { return entries_.rows(); }  // k
  Eigen::Index dimension() const { return entries_.cols(); }     // p
  const Eigen::MatrixXd& entries() const { return entries_; }
  std::uint64_t seed() const { return seed_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;          // A x
  Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& v) const;  // A^T v

  /// Cached Lipschitz constant; runs the default power iteration on first
  /// use.
  double lipschitz() const;

  std::optional<double> cached_lipschitz() const { return lipschitz_; }

 private:
  friend LipschitzEstimate estimate_lipschitz(const SensingOperator& op,
                                              double tol, int max_iters);
  Eigen::MatrixXd entries_;
  std::uint64_t seed_ = 0;
  mutable std::optional<double> lipschitz_;
};

/// Observation vector y of length k plus the noise level and the PRNG seed
/// the noise was drawn from.
struct MeasurementSet {
  Eigen::VectorXd y;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Dense operator with i.i.d. N(0, 1/k) entries drawn row-major from a
/// seeded NormalSampler. Same (k, p, seed) always yields the same matrix.
SensingOperator generate_gaussian_operator(Eigen::Index k, Eigen::Index p,
                                           std::uint64_t seed);

/// y = A x + n with n i.i.d. N(0, sigma^2); sigma = 0 gives exact y = A x.
/// The noise seed is independent of the matrix seed so one operator can be
/// reused across noise realizations.
MeasurementSet measure(const SensingOperator& op, const Eigen::VectorXd& x,
                       double sigma, std::uint64_t seed);

/// Proxy observations z = A^T y.
Eigen::VectorXd proxy_observations(const SensingOperator& op,
                                   const MeasurementSet& meas);

/// Power iteration on A^T A from a seeded random start. Stops when the
/// relative change between successive Rayleigh quotients drops below tol,
/// returns the estimate scaled by 1.001 (a slight overestimate keeps the
/// 1/L step safe), and caches the value on the operator. If max_iters is
/// hit first the best iterate is returned with converged = false.
LipschitzEstimate estimate_lipschitz(const SensingOperator& op,
                                     double tol = 1e-6, int max_iters = 1000);

/// Binary operator dump: magic "LSESOP01", then k, p, seed as little-endian
/// uint64, then k*p row-major little-endian float64 entries.
void save_operator(const SensingOperator& op, const std::filesystem::path& path);
SensingOperator load_operator(const std::filesystem::path& path);

}  // namespace lse
