#include "lse/tv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lse {

namespace {

// Forward differences of a row-major m-by-n vector into preallocated
// vertical ((m-1)*n) and horizontal (m*(n-1)) buffers.
void differences_into(const Eigen::VectorXd& x, int m, int n,
                      Eigen::VectorXd& vertical, Eigen::VectorXd& horizontal) {
  for (int i = 0; i + 1 < m; ++i) {
    for (int j = 0; j < n; ++j) {
      vertical[static_cast<Eigen::Index>(i) * n + j] =
          x[static_cast<Eigen::Index>(i) * n + j] -
          x[static_cast<Eigen::Index>(i + 1) * n + j];
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      horizontal[static_cast<Eigen::Index>(i) * (n - 1) + j] =
          x[static_cast<Eigen::Index>(i) * n + j] -
          x[static_cast<Eigen::Index>(i) * n + j + 1];
    }
  }
}

// Adjoint of differences_into: out(i,j) = P(i,j) - P(i-1,j) + Q(i,j) - Q(i,j-1)
// with out-of-range dual entries read as zero.
void adjoint_into(const Eigen::VectorXd& vertical,
                  const Eigen::VectorXd& horizontal, int m, int n,
                  Eigen::VectorXd& out) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      if (i + 1 < m) acc += vertical[static_cast<Eigen::Index>(i) * n + j];
      if (i > 0) acc -= vertical[static_cast<Eigen::Index>(i - 1) * n + j];
      if (j + 1 < n) acc += horizontal[static_cast<Eigen::Index>(i) * (n - 1) + j];
      if (j > 0) acc -= horizontal[static_cast<Eigen::Index>(i) * (n - 1) + j - 1];
      out[static_cast<Eigen::Index>(i) * n + j] = acc;
    }
  }
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

// Feasible-set projection. Isotropic: the vertical/horizontal pair sharing
// pixel (i,j) is projected onto the unit disk; entries that appear only in
// boundary terms are clamped scalarly. Anisotropic: every entry clamped to
// [-1,1].
void project_duals(Eigen::VectorXd& vertical, Eigen::VectorXd& horizontal,
                   int m, int n, TvFlavor flavor) {
  if (flavor == TvFlavor::Anisotropic) {
    for (Eigen::Index i = 0; i < vertical.size(); ++i) {
      vertical[i] = clamp_unit(vertical[i]);
    }
    for (Eigen::Index i = 0; i < horizontal.size(); ++i) {
      horizontal[i] = clamp_unit(horizontal[i]);
    }
    return;
  }
  for (int i = 0; i + 1 < m; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      const Eigen::Index vi = static_cast<Eigen::Index>(i) * n + j;
      const Eigen::Index hi = static_cast<Eigen::Index>(i) * (n - 1) + j;
      const double norm =
          std::sqrt(vertical[vi] * vertical[vi] + horizontal[hi] * horizontal[hi]);
      if (norm > 1.0) {
        vertical[vi] /= norm;
        horizontal[hi] /= norm;
      }
    }
    // last column: vertical difference has no horizontal mate
    const Eigen::Index vi = static_cast<Eigen::Index>(i) * n + (n - 1);
    vertical[vi] = clamp_unit(vertical[vi]);
  }
  for (int j = 0; j + 1 < n; ++j) {  // last row: horizontal stands alone
    const Eigen::Index hi = static_cast<Eigen::Index>(m - 1) * (n - 1) + j;
    horizontal[hi] = clamp_unit(horizontal[hi]);
  }
}

}  // namespace

double tv_norm(const Image& img, TvFlavor flavor) {
  const int m = img.rows();
  const int n = img.cols();
  double sum = 0.0;
  for (int i = 0; i + 1 < m; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      const double dv = img(i, j) - img(i + 1, j);
      const double dh = img(i, j) - img(i, j + 1);
      sum += flavor == TvFlavor::Isotropic ? std::sqrt(dv * dv + dh * dh)
                                           : std::abs(dv) + std::abs(dh);
    }
  }
  for (int i = 0; i + 1 < m; ++i) {
    sum += std::abs(img(i, n - 1) - img(i + 1, n - 1));
  }
  for (int j = 0; j + 1 < n; ++j) {
    sum += std::abs(img(m - 1, j) - img(m - 1, j + 1));
  }
  return sum;
}

DualField forward_differences(const Image& img) {
  const int m = img.rows();
  const int n = img.cols();
  DualField d;
  d.rows = m;
  d.cols = n;
  d.vertical = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m - 1) * n);
  d.horizontal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m) * (n - 1));
  differences_into(img.pixels(), m, n, d.vertical, d.horizontal);
  return d;
}

Image divergence_adjoint(const DualField& d) {
  const int m = d.rows;
  const int n = d.cols;
  if (m <= 0 || n <= 0 ||
      d.vertical.size() != static_cast<Eigen::Index>(m - 1) * n ||
      d.horizontal.size() != static_cast<Eigen::Index>(m) * (n - 1)) {
    throw std::invalid_argument(
        "divergence_adjoint: field shapes inconsistent with image dims");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(m) * n);
  adjoint_into(d.vertical, d.horizontal, m, n, out);
  return Image(m, n, std::move(out));
}

TvProxResult tv_prox_with_duals(const Image& b, double weight, TvFlavor flavor,
                                int inner_iters, double inner_tol) {
  if (weight < 0.0) {
    throw std::invalid_argument("tv_prox: weight must be >= 0");
  }
  const int m = b.rows();
  const int n = b.cols();
  const Eigen::Index nv = static_cast<Eigen::Index>(m - 1) * n;
  const Eigen::Index nh = static_cast<Eigen::Index>(m) * (n - 1);

  TvProxResult result;
  result.duals = DualField{m, n, Eigen::VectorXd::Zero(nv),
                           Eigen::VectorXd::Zero(nh)};
  if (weight == 0.0 || (nv == 0 && nh == 0)) {
    result.value = b;
    return result;
  }

  // Accelerated projected gradient on the dual of
  //   min_u weight*TV(u) + 0.5*||u - b||^2,
  // with primal recovery u = b - weight * adjoint(P,Q). The squared norm of
  // the 2-D difference operator is at most 8, giving the safe dual step
  // 1/(8*weight).
  const double step = 1.0 / (8.0 * weight);
  Eigen::VectorXd p_cur = Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd q_cur = Eigen::VectorXd::Zero(nh);
  Eigen::VectorXd p_extra = p_cur;
  Eigen::VectorXd q_extra = q_cur;
  Eigen::VectorXd u(b.size());
  Eigen::VectorXd grad_v(nv);
  Eigen::VectorXd grad_h(nh);
  double t = 1.0;

  for (int iter = 1; iter <= inner_iters; ++iter) {
    adjoint_into(p_extra, q_extra, m, n, u);
    u = b.pixels() - weight * u;
    differences_into(u, m, n, grad_v, grad_h);

    Eigen::VectorXd p_next = p_extra + step * grad_v;
    Eigen::VectorXd q_next = q_extra + step * grad_h;
    project_duals(p_next, q_next, m, n, flavor);

    const double change = std::sqrt((p_next - p_cur).squaredNorm() +
                                    (q_next - q_cur).squaredNorm());
    const double scale = std::max(
        std::sqrt(p_cur.squaredNorm() + q_cur.squaredNorm()), 1e-12);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    p_extra = p_next + momentum * (p_next - p_cur);
    q_extra = q_next + momentum * (q_next - q_cur);
    p_cur = std::move(p_next);
    q_cur = std::move(q_next);
    t = t_next;
    result.iterations = iter;
    if (change <= inner_tol * scale) {
      break;
    }
  }

  // Recover the primal from the last projected dual, which is feasible.
  adjoint_into(p_cur, q_cur, m, n, u);
  u = b.pixels() - weight * u;
  result.value = Image(m, n, std::move(u));
  result.duals.vertical = std::move(p_cur);
  result.duals.horizontal = std::move(q_cur);
  return result;
}

Image tv_prox(const Image& b, double weight, TvFlavor flavor, int inner_iters,
              double inner_tol) {
  return tv_prox_with_duals(b, weight, flavor, inner_iters, inner_tol).value;
}

}  // namespace lse
