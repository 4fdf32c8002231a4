#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nodalab/common.hpp"
#include "nodalab/radial.hpp"

namespace nodal {

/// w = (|x|^2 - r^2)^k with its exact first and second Laplacians.
/// The normal derivatives of w through order k-1 vanish on |x| = r.
struct PolynomialWeight {
  int k = 0;
  double r = 0;
  int d = 0;
  bool outside_hypothesis = false;  // k odd or k <= 4
  RadialExpansion w;
  RadialExpansion lap_w;
  RadialExpansion lap2_w;
};

inline PolynomialWeight polynomial_weight(int k, double r, int d) {
  require(k >= 1, "polynomial_weight: k >= 1");
  require(r > 0, "polynomial_weight: r > 0");
  PolynomialWeight pw;
  pw.k = k;
  pw.r = r;
  pw.d = d;
  pw.outside_hypothesis = (k % 2 != 0) || (k <= 4);

  pw.w.dim = d;
  const xreal r2 = static_cast<xreal>(r) * static_cast<xreal>(r);
  xreal binom = 1.0L;
  for (int i = 0; i <= k; ++i) {
    const xreal c = binom * std::pow(-r2, static_cast<xreal>(k - i));
    pw.w.terms.push_back({c, static_cast<xreal>(2 * i)});
    binom = binom * static_cast<xreal>(k - i) / static_cast<xreal>(i + 1);
  }
  pw.w.canonicalize();
  pw.lap_w = apply_laplacian_radial(pw.w);
  pw.lap2_w = apply_laplacian_radial(pw.lap_w);
  return pw;
}

/// Largest relative residual of the radial derivatives of w through order
/// k-1 on |x| = r; zero up to roundoff by construction.
inline double boundary_derivative_residual(const PolynomialWeight& pw) {
  RadialExpansion der = pw.w;
  double worst = 0;
  for (int j = 0; j <= pw.k - 1; ++j) {
    if (j > 0) der = der.derivative();
    const xreal scale = der.eval_abs(static_cast<xreal>(pw.r));
    const xreal val = std::abs(der.eval(static_cast<xreal>(pw.r)));
    worst = std::max(worst, static_cast<double>(val / std::max<xreal>(scale, 1e-300L)));
  }
  return worst;
}

/// Result of the threshold scan for the fourth-order positivity bracket.
struct ThresholdResult {
  double r_min = 0;        // smallest r with min over the open ball positive
  double r_star = 0;       // sqrt(1/lambda1 + 1/lambda2)
  double ratio = 0;        // r_min / r_star
  double deflation_residual = 0;
};

/// (Delta + l1)(Delta + l2) w on the OPEN ball carries the exact factor
/// (rho^2 - r^2)^{k-4}, which vanishes at the boundary; the sign scan runs
/// on the deflated quotient to avoid cancellation noise there.
inline xreal theorem3_interior_min(int k, int d, double l1, double l2, double r,
                                   double* deflation_residual = nullptr) {
  PolynomialWeight pw = polynomial_weight(k, r, d);
  RadialExpansion op = apply_script_L(pw.w, {l1, l2});
  const xreal r2 = static_cast<xreal>(r) * static_cast<xreal>(r);
  auto defl = deflate_even_expansion(op, r2, k - 4);
  if (deflation_residual) {
    const xreal scale = std::max<xreal>(op.max_abs_coeff(), 1.0L);
    *deflation_residual = static_cast<double>(defl.remainder / scale);
  }
  // (rho^2 - r^2)^{k-4} > 0 on the open ball for even k, so the sign of the
  // operator there is the sign of the quotient.
  const auto mn = min_on_interval(defl.quotient, 0.0L, static_cast<xreal>(r), 4096);
  return mn.value;
}

inline ThresholdResult verify_theorem3_threshold(int k, int d, double lambda1, double lambda2) {
  require(k % 2 == 0 && k > 4, "verify_theorem3_threshold: k must be an even integer > 4");
  require(lambda1 > 0 && lambda2 > 0, "verify_theorem3_threshold: lambdas > 0");

  ThresholdResult res;
  res.r_star = std::sqrt(1.0 / lambda1 + 1.0 / lambda2);

  double lo = 1e-3 * res.r_star, hi = 64.0 * res.r_star;
  double rem = 0;
  const auto minat = [&](double r) { return theorem3_interior_min(k, d, lambda1, lambda2, r, &rem); };
  if (!(minat(lo) <= 0 && minat(hi) > 0))
    throw std::domain_error("verify_theorem3_threshold: no sign change in scan bracket");
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (minat(mid) > 0)
      hi = mid;
    else
      lo = mid;
  }
  res.r_min = 0.5 * (lo + hi);
  res.ratio = res.r_min / res.r_star;
  res.deflation_residual = rem;
  return res;
}

}  // namespace nodal
