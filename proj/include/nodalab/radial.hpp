#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "nodalab/common.hpp"

namespace nodal {

/// Finite sum  sum_i c_i |x|^{p_i}  with real exponents, closed under the
/// exact radial Laplacian calculus in dimension d:
///
///   Delta ( c |x|^p ) = c p (p + d - 2) |x|^{p-2}.
///
/// Exponents are canonicalized (equal exponents merged, negligible
/// coefficients dropped). Evaluation excludes 0 whenever a negative
/// exponent is present.
struct RadialExpansion {
  struct Term {
    xreal coeff;
    xreal exponent;
  };

  int dim = 3;
  std::vector<Term> terms;  // sorted by exponent ascending

  static RadialExpansion power(int d, xreal coeff, xreal exponent) {
    RadialExpansion e;
    e.dim = d;
    e.terms.push_back({coeff, exponent});
    return e;
  }

  bool empty() const { return terms.empty(); }

  xreal max_abs_coeff() const {
    xreal m = 0;
    for (const auto& t : terms) m = std::max(m, std::abs(t.coeff));
    return m;
  }

  bool has_negative_exponent() const {
    for (const auto& t : terms)
      if (t.exponent < 0) return true;
    return false;
  }

  void canonicalize() {
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.exponent < b.exponent; });
    std::vector<Term> merged;
    for (const auto& t : terms) {
      if (!merged.empty() &&
          std::abs(merged.back().exponent - t.exponent) <=
              1e-12L * std::max<xreal>(1.0L, std::abs(t.exponent))) {
        merged.back().coeff += t.coeff;
      } else {
        merged.push_back(t);
      }
    }
    xreal cmax = 0;
    for (const auto& t : merged) cmax = std::max(cmax, std::abs(t.coeff));
    terms.clear();
    for (const auto& t : merged)
      if (std::abs(t.coeff) >= 1e-15L * cmax && t.coeff != 0.0L) terms.push_back(t);
  }

  xreal eval(xreal rho) const {
    if (rho <= 0 && has_negative_exponent())
      throw precondition_error("radial expansion with negative exponent evaluated at rho <= 0");
    xreal s = 0;
    for (const auto& t : terms) s += t.coeff * std::pow(rho, t.exponent);
    return s;
  }

  /// Term-wise evaluation of sum_i |c_i| rho^{p_i}; roundoff scale for eval.
  xreal eval_abs(xreal rho) const {
    xreal s = 0;
    for (const auto& t : terms) s += std::abs(t.coeff) * std::pow(rho, t.exponent);
    return s;
  }

  RadialExpansion& operator+=(const RadialExpansion& o) {
    for (const auto& t : o.terms) terms.push_back(t);
    canonicalize();
    return *this;
  }

  RadialExpansion& operator*=(xreal s) {
    for (auto& t : terms) t.coeff *= s;
    return *this;
  }

  /// d/drho, term by term.
  RadialExpansion derivative() const {
    RadialExpansion out;
    out.dim = dim;
    for (const auto& t : terms) {
      if (t.exponent != 0.0L) out.terms.push_back({t.coeff * t.exponent, t.exponent - 1});
    }
    out.canonicalize();
    return out;
  }

  RadialExpansion derivative(int order) const {
    RadialExpansion out = *this;
    for (int i = 0; i < order; ++i) out = out.derivative();
    return out;
  }
};

/// One application of the Euclidean Laplacian on a radial expansion; exact.
inline RadialExpansion apply_laplacian_radial(const RadialExpansion& e) {
  RadialExpansion out;
  out.dim = e.dim;
  for (const auto& t : e.terms) {
    const xreal factor = t.exponent * (t.exponent + e.dim - 2);
    if (factor != 0.0L) out.terms.push_back({t.coeff * factor, t.exponent - 2});
  }
  out.canonicalize();
  return out;
}

/// m-fold Laplacian.
inline RadialExpansion apply_power_Lm(const RadialExpansion& e, int m) {
  require(m >= 1, "apply_power_Lm: m >= 1");
  RadialExpansion cur = e;
  for (int i = 0; i < m; ++i) cur = apply_laplacian_radial(cur);
  return cur;
}

/// Exact composition prod_k (Delta + gamma_k) on the expansion.
inline RadialExpansion apply_script_L(const RadialExpansion& e, const std::vector<double>& gammas) {
  RadialExpansion cur = e;
  for (double g : gammas) {
    RadialExpansion next = apply_laplacian_radial(cur);
    RadialExpansion shifted = cur;
    shifted *= static_cast<xreal>(g);
    next += shifted;
    cur = next;
  }
  return cur;
}

/// Minimum of a radial expansion over [lo, hi]: dense scan over `samples`
/// points plus golden-section refinement around the best bracket.
struct RadialMin {
  xreal value;
  xreal argmin;
};

template <typename F>
RadialMin minimize_scalar(const F& f, xreal lo, xreal hi, int samples = 4096,
                          xreal rel_tol = 1e-12L) {
  xreal best = std::numeric_limits<xreal>::max();
  int best_i = 0;
  std::vector<xreal> xs(static_cast<std::size_t>(samples) + 1);
  for (int i = 0; i <= samples; ++i) {
    const xreal x = lo + (hi - lo) * static_cast<xreal>(i) / samples;
    xs[static_cast<std::size_t>(i)] = x;
    const xreal v = f(x);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  xreal a = xs[static_cast<std::size_t>(std::max(0, best_i - 1))];
  xreal b = xs[static_cast<std::size_t>(std::min(samples, best_i + 1))];
  const xreal gr = 0.6180339887498949L;
  xreal x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  xreal f1 = f(x1), f2 = f(x2);
  while ((b - a) > rel_tol * std::max<xreal>(1.0L, std::abs(a) + std::abs(b))) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  const xreal xm = 0.5L * (a + b);
  const xreal fm = f(xm);
  if (fm < best) return {fm, xm};
  return {best, xs[static_cast<std::size_t>(best_i)]};
}

inline RadialMin min_on_interval(const RadialExpansion& e, xreal lo, xreal hi, int samples = 4096) {
  return minimize_scalar([&](xreal x) { return e.eval(x); }, lo, hi, samples);
}

/// Divides an even-exponent expansion, read as a polynomial in y = rho^2,
/// by (y - root)^count. Returns the quotient (again as an expansion in rho)
/// and the largest absolute remainder encountered, which must be zero up to
/// roundoff when the factor is exact. Deflating the known boundary factor
/// is what keeps sign scans well conditioned near rho^2 = root.
struct DeflationResult {
  RadialExpansion quotient;
  xreal remainder;
};

inline DeflationResult deflate_even_expansion(const RadialExpansion& e, xreal root, int count) {
  int max_deg = 0;
  for (const auto& t : e.terms) {
    const long p = std::lround(static_cast<double>(t.exponent));
    require(std::abs(t.exponent - p) < 1e-9L && p >= 0 && p % 2 == 0,
            "deflate_even_expansion: exponents must be even non-negative integers");
    max_deg = std::max(max_deg, static_cast<int>(p / 2));
  }
  std::vector<xreal> c(static_cast<std::size_t>(max_deg) + 1, 0.0L);
  for (const auto& t : e.terms)
    c[static_cast<std::size_t>(std::lround(static_cast<double>(t.exponent)) / 2)] += t.coeff;

  xreal worst_rem = 0;
  for (int pass = 0; pass < count; ++pass) {
    require(c.size() >= 2, "deflate_even_expansion: degree too low for factor count");
    // synthetic division by (y - root)
    const std::size_t n = c.size() - 1;
    std::vector<xreal> q(n, 0.0L);
    q[n - 1] = c[n];
    for (std::size_t i = n - 1; i >= 1; --i) q[i - 1] = c[i] + root * q[i];
    const xreal rem = c[0] + root * q[0];
    worst_rem = std::max(worst_rem, std::abs(rem));
    c = q;
  }
  DeflationResult res;
  res.quotient.dim = e.dim;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] != 0.0L) res.quotient.terms.push_back({c[i], static_cast<xreal>(2 * i)});
  res.quotient.canonicalize();
  res.remainder = worst_rem;
  return res;
}

}  // namespace nodal
