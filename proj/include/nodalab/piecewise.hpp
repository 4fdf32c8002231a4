#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nodalab/common.hpp"

namespace nodal {

/// Piecewise polynomial on the line: constant to the left of the first
/// knot and to the right of the last, polynomial in the local coordinate
/// u = x - knot[i] on each interior piece. Local bases keep evaluation
/// stable for the short pieces produced by repeated box convolutions.
struct PiecewisePoly {
  std::vector<xreal> knots;                 // strictly increasing
  std::vector<std::vector<xreal>> pieces;   // pieces[i] on [knots[i], knots[i+1]]
  xreal const_left = 0;
  xreal const_right = 0;

  static xreal eval_poly(const std::vector<xreal>& c, xreal u) {
    xreal s = 0;
    for (std::size_t j = c.size(); j-- > 0;) s = s * u + c[j];
    return s;
  }

  static std::vector<xreal> shift_poly(const std::vector<xreal>& c, xreal delta) {
    // p(u + delta) re-expanded in powers of u
    std::vector<xreal> out(c.size(), 0.0L);
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (c[j] == 0.0L) continue;
      xreal bin = 1.0L;  // C(j, i)
      for (std::size_t i = 0; i <= j; ++i) {
        out[i] += c[j] * bin * std::pow(delta, static_cast<xreal>(j - i));
        bin = bin * static_cast<xreal>(j - i) / static_cast<xreal>(i + 1);
      }
    }
    return out;
  }

  std::size_t piece_index(xreal x) const {
    // first piece whose right knot is > x, clamped
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    if (it == knots.begin()) return static_cast<std::size_t>(-1);  // left of domain
    std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
    if (i >= pieces.size()) return static_cast<std::size_t>(-2);   // right of domain
    return i;
  }

  xreal eval(xreal x) const {
    if (knots.empty() || x < knots.front()) return const_left;
    if (x >= knots.back()) return const_right;
    const std::size_t i = piece_index(x);
    return eval_poly(pieces[i], x - knots[i]);
  }

  PiecewisePoly derivative() const {
    PiecewisePoly d;
    d.knots = knots;
    d.const_left = 0;
    d.const_right = 0;
    d.pieces.reserve(pieces.size());
    for (const auto& c : pieces) {
      std::vector<xreal> dc;
      for (std::size_t j = 1; j < c.size(); ++j) dc.push_back(c[j] * static_cast<xreal>(j));
      if (dc.empty()) dc.push_back(0.0L);
      d.pieces.push_back(std::move(dc));
    }
    return d;
  }

  PiecewisePoly derivative(int order) const {
    PiecewisePoly d = *this;
    for (int i = 0; i < order; ++i) d = d.derivative();
    return d;
  }

  /// Antiderivative F with F(knots.front()) = 0, continuous across pieces,
  /// and linear continuation on both sides.
  struct Antiderivative {
    const PiecewisePoly* f;
    std::vector<xreal> offsets;  // F at each knot

    xreal eval(xreal x) const {
      const auto& k = f->knots;
      if (x <= k.front()) return f->const_left * (x - k.front());
      if (x >= k.back()) return offsets.back() + f->const_right * (x - k.back());
      const std::size_t i = f->piece_index(x);
      const auto& c = f->pieces[i];
      const xreal u = x - k[i];
      xreal s = 0;
      for (std::size_t j = c.size(); j-- > 0;) s = s * u + c[j] / static_cast<xreal>(j + 1);
      return offsets[i] + s * u;
    }
  };

  Antiderivative antiderivative() const {
    Antiderivative F{this, {}};
    F.offsets.resize(knots.size(), 0.0L);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      const auto& c = pieces[i];
      const xreal w = knots[i + 1] - knots[i];
      xreal s = 0;
      for (std::size_t j = c.size(); j-- > 0;) s = s * w + c[j] / static_cast<xreal>(j + 1);
      F.offsets[i + 1] = F.offsets[i] + s * w;
    }
    return F;
  }

  /// Convolution with the unit-mass box of width eps centered at 0:
  /// g(x) = ( F(x + eps/2) - F(x - eps/2) ) / eps, computed exactly piece
  /// by piece on the refined knot set.
  PiecewisePoly convolve_box(xreal eps) const {
    require(eps > 0, "convolve_box: eps > 0");
    const xreal e2 = eps / 2;
    std::vector<xreal> nk;
    for (xreal k : knots) {
      nk.push_back(k - e2);
      nk.push_back(k + e2);
    }
    std::sort(nk.begin(), nk.end());
    nk.erase(std::unique(nk.begin(), nk.end(),
                         [](xreal a, xreal b) { return std::abs(a - b) < 1e-30L; }),
             nk.end());

    const Antiderivative F = antiderivative();
    PiecewisePoly g;
    g.knots = nk;
    g.const_left = const_left;
    g.const_right = const_right;
    g.pieces.resize(nk.size() - 1);

    const std::size_t max_deg = [&] {
      std::size_t m = 1;
      for (const auto& c : pieces) m = std::max(m, c.size());
      return m + 1;
    }();

    for (std::size_t i = 0; i + 1 < nk.size(); ++i) {
      const xreal a = nk[i];
      // polynomial of F(a + shift + u) in u, for a fixed shift, valid while
      // a + shift + u stays inside a single source region
      auto f_shifted = [&](xreal shift) -> std::vector<xreal> {
        const xreal x0 = a + shift;
        const xreal mid = x0 + (nk[i + 1] - a) * 0.5L;
        std::vector<xreal> c(max_deg + 1, 0.0L);
        if (mid <= knots.front()) {
          c[0] = const_left * (x0 - knots.front());
          c[1] = const_left;
        } else if (mid >= knots.back()) {
          c[0] = F.offsets.back() + const_right * (x0 - knots.back());
          c[1] = const_right;
        } else {
          const std::size_t pi = piece_index(mid);
          // antiderivative of pieces[pi] in its local coordinate
          std::vector<xreal> ac(pieces[pi].size() + 1, 0.0L);
          ac[0] = F.offsets[pi];
          for (std::size_t j = 0; j < pieces[pi].size(); ++j)
            ac[j + 1] = pieces[pi][j] / static_cast<xreal>(j + 1);
          const xreal delta = x0 - knots[pi];
          auto sh = shift_poly(ac, delta);
          for (std::size_t j = 0; j < sh.size() && j < c.size(); ++j) c[j] = sh[j];
        }
        return c;
      };
      auto hi = f_shifted(e2);
      auto lo = f_shifted(-e2);
      std::vector<xreal> piece(std::max(hi.size(), lo.size()), 0.0L);
      for (std::size_t j = 0; j < piece.size(); ++j) {
        const xreal h = j < hi.size() ? hi[j] : 0.0L;
        const xreal l = j < lo.size() ? lo[j] : 0.0L;
        piece[j] = (h - l) / eps;
      }
      while (piece.size() > 1 && piece.back() == 0.0L) piece.pop_back();
      g.pieces[i] = std::move(piece);
    }
    return g;
  }
};

}  // namespace nodal
