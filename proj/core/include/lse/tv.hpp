#pragma once

#include <Eigen/Core>

#include "lse/image.hpp"

namespace lse {

enum class TvFlavor {
  Isotropic,   // interior vertical/horizontal pairs under an l2 root
  Anisotropic  // plain l1 sum of all differences
};

/// Dual variables of the TV prox subproblem: one multiplier per
/// vertical difference ((m-1)-by-n) and one per horizontal difference
/// (m-by-(n-1)), both row-major.
struct DualField {
  int rows = 0;  // image rows m
  int cols = 0;  // image cols n
  Eigen::VectorXd vertical;    // (m-1)*n entries, X(i,j) - X(i+1,j)
  Eigen::VectorXd horizontal;  // m*(n-1) entries, X(i,j) - X(i,j+1)
};

/// Total-variation seminorm of an image, including the boundary-only
/// difference terms. Nonnegative, zero exactly on constant images.
double tv_norm(const Image& img, TvFlavor flavor);

/// Forward differences D_v[i,j] = X(i,j) - X(i+1,j) and
/// D_h[i,j] = X(i,j) - X(i,j+1).
DualField forward_differences(const Image& img);

/// Exact linear adjoint of forward_differences:
/// <forward_differences(X), (P,Q)> == <X, divergence_adjoint(P,Q)>.
Image divergence_adjoint(const DualField& d);

struct TvProxResult {
  Image value;
  DualField duals;  // final projected dual iterate, feasible by construction
  int iterations = 0;
};

/// Approximate minimizer of weight*TV(u) + 0.5*||u - b||^2 computed by
/// accelerated gradient projection on the dual with step 1/(8*weight).
/// Stops after inner_iters steps or when the relative dual change drops
/// below inner_tol. weight = 0 short-circuits to b.
Image tv_prox(const Image& b, double weight, TvFlavor flavor,
              int inner_iters = 50, double inner_tol = 1e-5);

/// tv_prox variant that also exposes the final dual field.
TvProxResult tv_prox_with_duals(const Image& b, double weight, TvFlavor flavor,
                                int inner_iters = 50, double inner_tol = 1e-5);

}  // namespace lse
