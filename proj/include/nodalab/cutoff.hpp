#pragma once

#include <cmath>
#include <vector>

#include "nodalab/common.hpp"
#include "nodalab/piecewise.hpp"

namespace nodal {

/// Smooth radial cutoff: identically 0 on [0, r/2], identically 1 on
/// [r, infinity), built by K-fold convolution of characteristic functions
/// whose widths follow a geometric sequence. The result is a piecewise
/// polynomial of degree K with K-1 continuous derivatives; the K-th
/// derivative is bounded with jumps at the knots.
struct CutoffFunction {
  double r = 0;
  int K = 0;
  double ratio = 0.7;                    // geometric width ratio
  std::vector<xreal> widths;             // box widths, sum = r/2
  PiecewisePoly psi;
  std::vector<double> derivative_max;    // measured max |psi^{(j)}|, j = 1..K
  double hormander_constant = 0;         // smallest C with
                                         // max_j <= (C j log^2(j+1))^j r^{-j}

  double eval(double rho) const { return static_cast<double>(psi.eval(rho)); }
};

inline CutoffFunction build_cutoff(double r, int K, double ratio = 0.7) {
  require(K >= 1, "build_cutoff: K >= 1");
  require(r > 0, "build_cutoff: r > 0");
  require(ratio > 0 && ratio < 1, "build_cutoff: ratio in (0,1)");

  CutoffFunction cf;
  cf.r = r;
  cf.K = K;
  cf.ratio = ratio;

  // geometric widths summing to r/2
  const xreal q = static_cast<xreal>(ratio);
  xreal geom = 0;
  for (int i = 0; i < K; ++i) geom += std::pow(q, static_cast<xreal>(i));
  const xreal w0 = static_cast<xreal>(r) / 2 / geom;
  for (int i = 0; i < K; ++i) cf.widths.push_back(w0 * std::pow(q, static_cast<xreal>(i)));

  // step at 3r/4, then repeated box convolution
  PiecewisePoly step;
  step.knots = {static_cast<xreal>(0.75L * r)};
  step.const_left = 0;
  step.const_right = 1;
  PiecewisePoly cur = step;
  for (int i = 0; i < K; ++i) cur = cur.convolve_box(cf.widths[static_cast<std::size_t>(i)]);
  cf.psi = cur;

  // measured derivative maxima and the a-posteriori Hormander-type constant
  cf.derivative_max.resize(static_cast<std::size_t>(K) + 1, 0.0);
  PiecewisePoly dj = cf.psi;
  double C = 0;
  for (int j = 1; j <= K; ++j) {
    dj = dj.derivative();
    double mx = 0;
    for (std::size_t p = 0; p + 1 < dj.knots.size(); ++p) {
      const xreal a = dj.knots[p], b = dj.knots[p + 1];
      for (int s = 0; s <= 64; ++s) {
        const xreal u = (b - a) * static_cast<xreal>(s) / 64;
        mx = std::max(mx, std::abs(static_cast<double>(
                              PiecewisePoly::eval_poly(dj.pieces[p], u))));
      }
    }
    cf.derivative_max[static_cast<std::size_t>(j)] = mx;
    const double denom = j * std::pow(std::log(j + 1.0), 2);
    C = std::max(C, std::pow(mx * std::pow(r, j), 1.0 / j) / denom);
  }
  cf.hormander_constant = C;
  return cf;
}

}  // namespace nodal
