#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lse/image.hpp"
#include "lse/sensing.hpp"
#include "lse/tv.hpp"

namespace lse {

struct SolverConfig {
  double alpha = 1.0;          // TV regularization weight
  LevelSpec level;             // supplies the box bounds [lower, upper]
  int rows = 0;                // image shape used to reshape iterates
  int cols = 0;
  int max_iters = 500;
  double rel_tol = 1e-4;
  int inner_iters = 50;        // TV prox settings
  double inner_tol = 1e-5;
  TvFlavor flavor = TvFlavor::Isotropic;
};

/// Iteration state of the accelerated scheme: current/previous iterates,
/// the extrapolated point, the momentum scalar (>= 1, strictly increasing),
/// and the step size rho = 1/L > 0.
struct SolverState {
  Eigen::VectorXd x_current;
  Eigen::VectorXd x_previous;
  Eigen::VectorXd extrapolated;
  double t = 1.0;
  double rho = 0.0;
  int iter = 0;
};

struct SolverResult {
  Image estimate;
  int iterations = 0;
  std::vector<double> objective_trace;  // 0.5*||Ax-y||^2 + alpha*TV(X)
  bool converged = false;
  double final_rel_change = 0.0;
};

/// Thrown when an iterate stops being finite; names the iteration.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(int iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// One gradient step r - rho * A^T(A r - y).
Eigen::VectorXd gradient_step(const SensingOperator& op,
                              const Eigen::VectorXd& y,
                              const Eigen::VectorXd& r, double rho);

/// Elementwise clamp to [lower, upper]. Requires lower < upper.
Eigen::VectorXd project_box(const Eigen::VectorXd& v, double lower,
                            double upper);

/// Momentum sequence update (1 + sqrt(1 + 4 t^2)) / 2.
double momentum_update(double t);

/// Accelerated proximal-gradient solve of the box-constrained TV problem
///   min 0.5*||Ax - y||^2 + alpha*TV(X)  s.t.  lower <= x_i <= upper.
/// Initialization rho = 1/L, t = 1, x = r = 0; per iteration: gradient step
/// at the extrapolated point, TV prox with multiplier alpha*rho, box
/// projection, then momentum extrapolation. Terminates when
/// ||x_k - x_{k-1}|| / max(1, ||x_{k-1}||) < rel_tol or at max_iters.
SolverResult solve(const SensingOperator& op, const MeasurementSet& meas,
                   const SolverConfig& cfg);

}  // namespace lse
