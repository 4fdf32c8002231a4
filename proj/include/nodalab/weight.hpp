#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nodalab/common.hpp"
#include "nodalab/cutoff.hpp"
#include "nodalab/radial.hpp"

namespace nodal {

enum class SignCase { a, b };

inline constexpr double kDefaultAlphaK = 8.0;
inline constexpr double kDefaultAlphaKprime = 2.0;
inline constexpr double kDefaultR0 = 0.5;
inline constexpr double kDefaultC = 3.0;

/// Growth exponent sigma(d, m) entering both the alpha selection and the
/// doubling-constant estimate: m^{(d+1)/2} in high dimension, m log^2(m+1)
/// for d <= 3.
inline double alpha_growth(int d, int m) {
  if (d >= 4) return std::pow(m, (d + 1) / 2.0);
  const double lg = std::log(m + 1.0);
  return m * lg * lg;
}

/// Deterministic choice of the singularity exponent alpha.
/// Case b adds the correction required when the gamma_k may be negative.
inline double select_alpha(int d, int m, double gamma, double r0, SignCase sc,
                           double K = kDefaultAlphaK, double Kprime = kDefaultAlphaKprime) {
  require(m >= 1, "select_alpha: m >= 1");
  double a = K * alpha_growth(d, m);
  if (sc == SignCase::b) a += Kprime * std::sqrt(m * gamma) * r0;
  return a;
}

/// v(x) = |x|^{-alpha} minus its Taylor polynomial of order 2m-1 at |x| = 3r.
/// All Taylor coefficients are positive for t <= s, so 0 <= vtilde <= v on
/// (0, 3r], and the value together with the first 2m-1 radial derivatives
/// vanish at 3r by construction.
struct TaylorRemainderWeight {
  double alpha = 0;
  int m = 1;
  double r = 0;
  int d = 3;
  RadialExpansion expansion;
};

inline TaylorRemainderWeight taylor_remainder(double alpha, int m, double r, int d) {
  require(alpha > 0, "taylor_remainder: alpha > 0");
  require(r > 0, "taylor_remainder: r > 0");
  require(m >= 1, "taylor_remainder: m >= 1");
  const xreal a = static_cast<xreal>(alpha);
  const xreal s = 3.0L * static_cast<xreal>(r);

  TaylorRemainderWeight w;
  w.alpha = alpha;
  w.m = m;
  w.r = r;
  w.d = d;
  w.expansion.dim = d;
  w.expansion.terms.push_back({1.0L, -a});

  // P_{2m-1}(t;s) = sum_k prod_{j<k}(alpha+j) / (s^{alpha+k} k!) (s-t)^k,
  // expanded into powers of t and subtracted.
  xreal prod = 1.0L;   // prod_{j<k} (alpha + j)
  xreal kfact = 1.0L;  // k!
  for (int k = 0; k <= 2 * m - 1; ++k) {
    if (k > 0) {
      prod *= (a + (k - 1));
      kfact *= k;
    }
    const xreal ck = prod / (std::pow(s, a + k) * kfact);
    xreal binom = 1.0L;
    for (int l = 0; l <= k; ++l) {
      const xreal c = ck * binom * ((l % 2 == 0) ? 1.0L : -1.0L) *
                      std::pow(s, static_cast<xreal>(k - l));
      w.expansion.terms.push_back({-c, static_cast<xreal>(l)});
      binom = binom * static_cast<xreal>(k - l) / static_cast<xreal>(l + 1);
    }
  }
  w.expansion.canonicalize();
  return w;
}

/// Configuration of one weight construction.
struct WeightConfig {
  int d = 3;
  int m = 1;
  std::vector<double> gammas;  // one per factor of the product operator
  double r = kDefaultR0 / kDefaultC;
  double r0 = kDefaultR0;
  SignCase sign_case = SignCase::a;
  std::optional<double> alpha_override;
  double alpha_K = kDefaultAlphaK;
  double alpha_Kprime = kDefaultAlphaKprime;

  double gamma_max() const {
    double g = 0;
    for (double x : gammas) g = std::max(g, std::abs(x));
    return g;
  }

  double alpha() const {
    if (alpha_override) return *alpha_override;
    return select_alpha(d, m, gamma_max(), r0, sign_case, alpha_K, alpha_Kprime);
  }

  void validate() const {
    require(m >= 1, "weight config: m >= 1");
    require(static_cast<int>(gammas.size()) == m, "weight config: gamma list length must equal m");
    require(r > 0 && r <= r0 / kDefaultC + 1e-15, "weight config: r <= r0 / c with c = 3");
    if (sign_case == SignCase::a)
      for (double g : gammas) require(g >= 0, "weight config: case a requires gamma_k >= 0");
  }
};

/// Terms c * rho^p * (rho - a)^k anchored at a; the class is closed under
/// the radial Laplacian, which is what makes the script-L action on
/// psi * vtilde exact on each cutoff piece.
struct MixedPiece {
  struct Term {
    xreal coeff;
    xreal p;
    int k;
  };
  xreal lo = 0, hi = 0;  // valid on [lo, hi], anchor = lo
  std::vector<Term> terms;

  void canonicalize() {
    std::sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) {
      if (x.k != y.k) return x.k < y.k;
      return x.p < y.p;
    });
    std::vector<Term> merged;
    for (const auto& t : terms) {
      if (!merged.empty() && merged.back().k == t.k &&
          std::abs(merged.back().p - t.p) < 1e-9L) {
        merged.back().coeff += t.coeff;
      } else {
        merged.push_back(t);
      }
    }
    terms.clear();
    for (const auto& t : merged)
      if (t.coeff != 0.0L) terms.push_back(t);
  }

  xreal eval(xreal rho) const {
    const xreal u = rho - lo;
    xreal s = 0;
    for (const auto& t : terms)
      s += t.coeff * std::pow(rho, t.p) * std::pow(u, static_cast<xreal>(t.k));
    return s;
  }

  MixedPiece laplacian(int d) const {
    MixedPiece out;
    out.lo = lo;
    out.hi = hi;
    for (const auto& t : terms) {
      // Delta [rho^p (rho-a)^k] = p(p+d-2) rho^{p-2} (rho-a)^k
      //                         + k(2p+d-1) rho^{p-1} (rho-a)^{k-1}
      //                         + k(k-1)    rho^p     (rho-a)^{k-2}
      const xreal p = t.p;
      const int k = t.k;
      if (p * (p + d - 2) != 0.0L) out.terms.push_back({t.coeff * p * (p + d - 2), p - 2, k});
      if (k >= 1) out.terms.push_back({t.coeff * k * (2 * p + d - 1), p - 1, k - 1});
      if (k >= 2) out.terms.push_back({t.coeff * static_cast<xreal>(k) * (k - 1), p, k - 2});
    }
    out.canonicalize();
    return out;
  }

  MixedPiece script_L(int d, const std::vector<double>& gammas) const {
    MixedPiece cur = *this;
    for (double g : gammas) {
      MixedPiece next = cur.laplacian(d);
      for (const auto& t : cur.terms)
        next.terms.push_back({t.coeff * static_cast<xreal>(g), t.p, t.k});
      next.canonicalize();
      cur = next;
    }
    return cur;
  }
};

/// Assembled weight: 0 on [0, r/2], psi * vtilde / n on [r/2, r],
/// vtilde / n on [r, 3r], with n = inf over [r, 2r] of script-L vtilde.
struct Weight {
  WeightConfig cfg;
  double alpha = 0;
  TaylorRemainderWeight vt;
  CutoffFunction psi;
  RadialExpansion L_vt;                 // script-L vtilde, exact
  xreal normalization = 0;              // inf over [r, 2r] of L_vt
  std::vector<MixedPiece> prod_pieces;  // psi * vtilde on the cutoff pieces
  std::vector<MixedPiece> L_prod_pieces;

  double eval(double rho) const {
    const double r = cfg.r;
    if (rho <= r / 2) return 0.0;
    const xreal v = vt.expansion.eval(static_cast<xreal>(rho));
    if (rho >= 3 * r) return 0.0;
    if (rho >= r) return static_cast<double>(v / normalization);
    return static_cast<double>(psi.psi.eval(static_cast<xreal>(rho)) * v / normalization);
  }

  /// script-L of the weight; exact piecewise calculus on [r/2, r], exact
  /// radial expansion on [r, 3r], identically zero below r/2.
  xreal eval_L(xreal rho) const {
    const xreal r = static_cast<xreal>(cfg.r);
    if (rho <= r / 2 || rho > 3 * r) return 0.0L;
    if (rho >= r) return L_vt.eval(rho) / normalization;
    for (const auto& p : L_prod_pieces)
      if (rho >= p.lo && rho <= p.hi) return p.eval(rho) / normalization;
    return L_prod_pieces.back().eval(rho) / normalization;
  }
};

inline Weight assemble_weight(const WeightConfig& cfg) {
  cfg.validate();
  Weight w;
  w.cfg = cfg;
  w.alpha = cfg.alpha();
  w.vt = taylor_remainder(w.alpha, cfg.m, cfg.r, cfg.d);
  w.L_vt = apply_script_L(w.vt.expansion, cfg.gammas);

  const xreal r = static_cast<xreal>(cfg.r);
  const auto inf = min_on_interval(w.L_vt, r, 2 * r);
  if (!(inf.value > 0)) {
    std::ostringstream os;
    os << "assemble_weight: normalization inf over [r,2r] of script-L vtilde is "
       << static_cast<double>(inf.value) << " <= 0 (alpha=" << w.alpha
       << " too small for the gamma list)";
    throw std::domain_error(os.str());
  }
  w.normalization = inf.value;

  w.psi = build_cutoff(cfg.r, 2 * cfg.m);
  for (std::size_t i = 0; i + 1 < w.psi.psi.knots.size(); ++i) {
    MixedPiece mp;
    mp.lo = w.psi.psi.knots[i];
    mp.hi = w.psi.psi.knots[i + 1];
    const auto& poly = w.psi.psi.pieces[i];
    for (std::size_t j = 0; j < poly.size(); ++j) {
      if (poly[j] == 0.0L) continue;
      for (const auto& t : w.vt.expansion.terms)
        mp.terms.push_back({poly[j] * t.coeff, t.exponent, static_cast<int>(j)});
    }
    mp.canonicalize();
    w.prod_pieces.push_back(mp);
    w.L_prod_pieces.push_back(mp.script_L(cfg.d, cfg.gammas));
  }
  return w;
}

/// Verification report for the four weight properties.
struct Lemma1Report {
  bool boundary_ok = false;     // (i)  derivatives through 2m-1 vanish at 3r
  bool annulus_lower_ok = false;  // (ii) script-L v_r >= 1 on [r, 2r]
  bool positivity_ok = false;   // (iii) script-L v_r >= 0 on [r, 3r]
  bool sup_finite = false;      // (iv) sup over [r/2, r] finite
  double boundary_worst_rel = 0;
  int boundary_worst_order = -1;
  double annulus_min = 0;
  double positivity_min = 0;
  double positivity_argmin = 0;
  double log_C_measured = 0;    // log of the recorded (iv) sup
  double alpha = 0;

  bool pass() const { return boundary_ok && annulus_lower_ok && positivity_ok && sup_finite; }

  std::string failure() const {
    std::ostringstream os;
    if (!boundary_ok)
      os << "(i) boundary derivative order " << boundary_worst_order << " relative residual "
         << boundary_worst_rel << "; ";
    if (!annulus_lower_ok) os << "(ii) min on [r,2r] = " << annulus_min << " < 1 - 1e-9; ";
    if (!positivity_ok)
      os << "(iii) min on [r,3r] = " << positivity_min << " at rho = " << positivity_argmin
         << "; ";
    if (!sup_finite) os << "(iv) sup on [r/2,r] not finite; ";
    return os.str();
  }
};

inline Lemma1Report verify_lemma1(const WeightConfig& cfg) {
  cfg.validate();
  Lemma1Report rep;
  rep.alpha = cfg.alpha();

  const double alpha = cfg.alpha();
  TaylorRemainderWeight vt = taylor_remainder(alpha, cfg.m, cfg.r, cfg.d);
  RadialExpansion Lvt = apply_script_L(vt.expansion, cfg.gammas);
  const xreal r = static_cast<xreal>(cfg.r);
  const xreal s = 3 * r;

  // (i): radial derivatives of vtilde at 3r, relative to those of v.
  rep.boundary_ok = true;
  RadialExpansion der = vt.expansion;
  xreal vscale_prod = 1.0L;
  for (int j = 0; j <= 2 * cfg.m - 1; ++j) {
    if (j > 0) {
      der = der.derivative();
      vscale_prod *= (static_cast<xreal>(alpha) + (j - 1));
    }
    const xreal vj = vscale_prod * std::pow(s, -static_cast<xreal>(alpha) - j);
    const double rel = static_cast<double>(std::abs(der.eval(s)) / vj);
    if (rel > rep.boundary_worst_rel) {
      rep.boundary_worst_rel = rel;
      rep.boundary_worst_order = j;
    }
    if (rel > 1e-9) rep.boundary_ok = false;
  }

  // normalization
  const auto inf = min_on_interval(Lvt, r, 2 * r);
  if (!(inf.value > 0)) {
    rep.annulus_lower_ok = false;
    rep.positivity_ok = false;
    rep.annulus_min = static_cast<double>(inf.value);
    const auto m3 = min_on_interval(Lvt, r, s);
    rep.positivity_min = static_cast<double>(m3.value);
    rep.positivity_argmin = static_cast<double>(m3.argmin);
    rep.sup_finite = false;
    return rep;
  }
  const xreal n = inf.value;

  // (ii) on a fresh, denser grid
  const auto m2 = minimize_scalar([&](xreal x) { return Lvt.eval(x) / n; }, r, 2 * r, 8191);
  rep.annulus_min = static_cast<double>(m2.value);
  rep.annulus_lower_ok = rep.annulus_min >= 1.0 - 1e-9;

  // (iii)
  const auto m3 = minimize_scalar([&](xreal x) { return Lvt.eval(x) / n; }, r, s, 8191);
  rep.positivity_min = static_cast<double>(m3.value);
  rep.positivity_argmin = static_cast<double>(m3.argmin);
  rep.positivity_ok = rep.positivity_min >= -1e-9;

  // (iv): exact piecewise calculus for script-L (psi vtilde) on [r/2, r].
  // Below r/2 the weight vanishes identically, so the sup over B_r is
  // attained on the cutoff transition.
  Weight w = assemble_weight(cfg);
  xreal sup = 0;
  for (const auto& piece : w.L_prod_pieces) {
    for (int i = 0; i <= 256; ++i) {
      const xreal rho = piece.lo + (piece.hi - piece.lo) * static_cast<xreal>(i) / 256;
      sup = std::max(sup, std::abs(piece.eval(rho) / n));
    }
  }
  rep.sup_finite = sup > 0 && std::isfinite(static_cast<double>(std::log(sup)));
  rep.log_C_measured = static_cast<double>(std::log(sup));
  return rep;
}

/// Double factorial with the conventions 0!! = (-1)!! = 1.
inline double semifactorial(int k) {
  if (k <= 0) return 1.0;
  double p = 1;
  for (int i = k; i >= 1; i -= 2) p *= i;
  return p;
}

}  // namespace nodal
