#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "lse/image.hpp"

namespace lse {

/// Parameter echo attached to a RiskReport.
struct EvalParams {
  Eigen::Index k = 0;
  double sigma = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
};

struct RiskReport {
  double excess_risk = 0.0;
  double empirical_risk = 0.0;
  std::size_t sym_diff_size = 0;
  std::string method_label;
  EvalParams params;
};

/// Excess risk (1/p) * sum over the symmetric difference of the true and
/// estimated gamma-level sets of |gamma - x_i|.
double excess_risk(const Image& truth, double gamma,
                   const LevelSetMask& estimate);

/// Empirical risk (1/p) * sum_i (gamma - y_i) * (+1 if i in S else -1) for
/// complete per-pixel observations y.
double empirical_risk(const Eigen::VectorXd& observations, double gamma,
                      const LevelSetMask& mask);

/// Coordinate-wise thresholding mask {i : observations[i] >= gamma}. Applied
/// to proxy observations z = A^T y this is the proxy-thresholding baseline;
/// it also minimizes the empirical risk over all masks.
LevelSetMask threshold_baseline(const Eigen::VectorXd& observations,
                                double gamma, int rows, int cols);

/// Bundle excess risk, empirical risk against the true pixels, and the
/// symmetric-difference size into a report.
RiskReport evaluate(const Image& truth, double gamma,
                    const LevelSetMask& estimate, const std::string& label,
                    const EvalParams& params);

}  // namespace lse
