#include "lse/risk.hpp"

#include <cmath>
#include <stdexcept>

namespace lse {

double excess_risk(const Image& truth, double gamma,
                   const LevelSetMask& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw std::invalid_argument("excess_risk: dimensions differ");
  }
  const LevelSetMask true_set = extract_level_set(truth, gamma);
  const auto& px = truth.pixels();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < px.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (true_set.contains(idx) != estimate.contains(idx)) {
      sum += std::abs(gamma - px[i]);
    }
  }
  return sum / static_cast<double>(px.size());
}

double empirical_risk(const Eigen::VectorXd& observations, double gamma,
                      const LevelSetMask& mask) {
  if (observations.size() != static_cast<Eigen::Index>(mask.size())) {
    throw std::invalid_argument("empirical_risk: dimensions differ");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < observations.size(); ++i) {
    const double sign = mask.contains(static_cast<std::size_t>(i)) ? 1.0 : -1.0;
    sum += (gamma - observations[i]) * sign;
  }
  return sum / static_cast<double>(observations.size());
}

LevelSetMask threshold_baseline(const Eigen::VectorXd& observations,
                                double gamma, int rows, int cols) {
  if (observations.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw std::invalid_argument(
        "threshold_baseline: observation length does not match rows*cols");
  }
  std::vector<std::uint8_t> members(static_cast<std::size_t>(observations.size()));
  for (Eigen::Index i = 0; i < observations.size(); ++i) {
    members[static_cast<std::size_t>(i)] = observations[i] >= gamma ? 1 : 0;
  }
  return LevelSetMask(rows, cols, std::move(members));
}

RiskReport evaluate(const Image& truth, double gamma,
                    const LevelSetMask& estimate, const std::string& label,
                    const EvalParams& params) {
  RiskReport report;
  report.excess_risk = excess_risk(truth, gamma, estimate);
  report.empirical_risk = empirical_risk(truth.pixels(), gamma, estimate);
  report.sym_diff_size =
      symmetric_difference(extract_level_set(truth, gamma), estimate).count();
  report.method_label = label;
  report.params = params;
  return report;
}

}  // namespace lse
