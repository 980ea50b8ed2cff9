#include "lse/solver.hpp"

#include <cassert>
#include <cmath>

namespace lse {

Eigen::VectorXd gradient_step(const SensingOperator& op,
                              const Eigen::VectorXd& y,
                              const Eigen::VectorXd& r, double rho) {
  if (y.size() != op.measurements() || r.size() != op.dimension()) {
    throw std::invalid_argument("gradient_step: dimension mismatch");
  }
  return r - rho * op.apply_adjoint(op.apply(r) - y);
}

Eigen::VectorXd project_box(const Eigen::VectorXd& v, double lower,
                            double upper) {
  if (!(lower < upper)) {
    throw std::invalid_argument("project_box: requires lower < upper");
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v[i];
    out[i] = x < lower ? lower : (x > upper ? upper : x);
  }
  return out;
}

double momentum_update(double t) {
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
}

namespace {

void validate(const SensingOperator& op, const MeasurementSet& meas,
              const SolverConfig& cfg) {
  if (cfg.rows <= 0 || cfg.cols <= 0 ||
      static_cast<Eigen::Index>(cfg.rows) * cfg.cols != op.dimension()) {
    throw std::invalid_argument(
        "solve: cfg.rows*cfg.cols must equal the operator dimension");
  }
  if (meas.y.size() != op.measurements()) {
    throw std::invalid_argument(
        "solve: measurement length does not match operator");
  }
  if (!(cfg.alpha > 0.0)) {
    throw std::invalid_argument("solve: alpha must be > 0");
  }
  if (cfg.max_iters < 1) {
    throw std::invalid_argument("solve: max_iters must be >= 1");
  }
  if (!(cfg.rel_tol > 0.0)) {
    throw std::invalid_argument("solve: rel_tol must be > 0");
  }
  if (!(cfg.level.lower < cfg.level.upper)) {
    throw std::invalid_argument("solve: requires lower < upper");
  }
}

}  // namespace

SolverResult solve(const SensingOperator& op, const MeasurementSet& meas,
                   const SolverConfig& cfg) {
  validate(op, meas, cfg);

  const Eigen::Index p = op.dimension();
  const double prox_weight = cfg.alpha / op.lipschitz();

  SolverState state;
  state.rho = 1.0 / op.lipschitz();
  state.x_previous = Eigen::VectorXd::Zero(p);   // x^0
  state.extrapolated = Eigen::VectorXd::Zero(p); // r^1
  state.t = 1.0;

  SolverResult result;
  result.objective_trace.reserve(static_cast<std::size_t>(cfg.max_iters));

  while (state.iter < cfg.max_iters) {
    ++state.iter;
    const Eigen::VectorXd x_grad =
        gradient_step(op, meas.y, state.extrapolated, state.rho);
    const Image prox = tv_prox(reshape_to_image(x_grad, cfg.rows, cfg.cols),
                               prox_weight, cfg.flavor, cfg.inner_iters,
                               cfg.inner_tol);
    if (!prox.pixels().allFinite()) {
      throw NumericalFailure(
          state.iter, "solve: non-finite iterate at iteration " +
                          std::to_string(state.iter) + " (diverged)");
    }
    state.x_current =
        project_box(prox.pixels(), cfg.level.lower, cfg.level.upper);
    assert(state.x_current.minCoeff() >= cfg.level.lower &&
           state.x_current.maxCoeff() <= cfg.level.upper);

    const double objective =
        0.5 * (op.apply(state.x_current) - meas.y).squaredNorm() +
        cfg.alpha * tv_norm(reshape_to_image(state.x_current, cfg.rows,
                                             cfg.cols),
                            cfg.flavor);
    if (!std::isfinite(objective)) {
      throw NumericalFailure(
          state.iter, "solve: non-finite objective at iteration " +
                          std::to_string(state.iter) + " (diverged)");
    }
    result.objective_trace.push_back(objective);

    const double rel_change = (state.x_current - state.x_previous).norm() /
                              std::max(1.0, state.x_previous.norm());

    const double t_next = momentum_update(state.t);
    state.extrapolated =
        state.x_current +
        ((state.t - 1.0) / t_next) * (state.x_current - state.x_previous);
    state.x_previous = state.x_current;
    state.t = t_next;

    result.iterations = state.iter;
    result.final_rel_change = rel_change;
    if (rel_change < cfg.rel_tol) {
      result.converged = true;
      break;
    }
  }

  result.estimate = reshape_to_image(state.x_previous, cfg.rows, cfg.cols);
  return result;
}

}  // namespace lse
