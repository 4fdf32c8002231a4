#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nodalab/radial.hpp"
#include "nodalab/weight.hpp"

using namespace nodal;

namespace {

// Independent oracle: differentiate c * t^p symbolically along the two-term
// route g'' + (d-1)/t g' instead of the merged power rule.
double laplacian_oracle(double c, double p, int d, double t) {
  const double second = c * p * (p - 1) * std::pow(t, p - 2);
  const double first = (d - 1) * c * p * std::pow(t, p - 1) / t;
  return second + first;
}

}  // namespace

TEST_CASE("radial Laplacian: closed-form cases") {
  // d=3: Delta |x|^-2 = 2 |x|^-4
  auto e = RadialExpansion::power(3, 1.0L, -2.0L);
  auto le = apply_laplacian_radial(e);
  REQUIRE(le.terms.size() == 1);
  CHECK(static_cast<double>(le.terms[0].coeff) == Catch::Approx(2.0));
  CHECK(static_cast<double>(le.terms[0].exponent) == Catch::Approx(-4.0));

  // constants are harmonic
  auto c = RadialExpansion::power(2, 5.0L, 0.0L);
  CHECK(apply_laplacian_radial(c).empty());

  // d=3: |x|^-1 is the fundamental solution
  auto f = RadialExpansion::power(3, 1.0L, -1.0L);
  CHECK(apply_laplacian_radial(f).empty());
}

TEST_CASE("radial Laplacian agrees with the symbolic differentiation oracle") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> coeff(-5.0, 5.0);
  std::uniform_real_distribution<double> expo(-6.0, 6.0);
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_real_distribution<double> tt(0.2, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double c = coeff(rng), p = expo(rng), t = tt(rng);
    const int d = dim(rng);
    auto e = RadialExpansion::power(d, static_cast<xreal>(c), static_cast<xreal>(p));
    const double got = static_cast<double>(apply_laplacian_radial(e).eval(static_cast<xreal>(t)));
    const double want = laplacian_oracle(c, p, d, t);
    const double scale = std::max(std::abs(want), std::abs(c) * std::pow(t, p - 2));
    REQUIRE(std::abs(got - want) <= 1e-12 * std::max(scale, 1e-300));
  }
}

TEST_CASE("iterated Laplacian powers") {
  // d=3, |x|^-4, m=2: 4*3 then 6*5 -> 360 |x|^-8
  auto e = RadialExpansion::power(3, 1.0L, -4.0L);
  auto l2 = apply_power_Lm(e, 2);
  REQUIRE(l2.terms.size() == 1);
  CHECK(static_cast<double>(l2.terms[0].coeff) == Catch::Approx(360.0));
  CHECK(static_cast<double>(l2.terms[0].exponent) == Catch::Approx(-8.0));

  // d=3, alpha=1 is annihilated in one step
  CHECK(apply_power_Lm(RadialExpansion::power(3, 1.0L, -1.0L), 1).empty());

  // d=5, alpha=2: 2*(2+2-5) = -2, sign flips when alpha is too small
  auto s = apply_power_Lm(RadialExpansion::power(5, 1.0L, -2.0L), 1);
  REQUIRE(s.terms.size() == 1);
  CHECK(static_cast<double>(s.terms[0].coeff) == Catch::Approx(-2.0));
}

TEST_CASE("product operator on radial expansions") {
  // gamma = [0,...,0] equals plain powers
  auto e = RadialExpansion::power(3, 1.0L, -4.0L);
  auto a = apply_script_L(e, {0.0, 0.0});
  auto b = apply_power_Lm(e, 2);
  REQUIRE(a.terms.size() == b.terms.size());
  for (std::size_t i = 0; i < a.terms.size(); ++i)
    CHECK(static_cast<double>(a.terms[i].coeff) ==
          Catch::Approx(static_cast<double>(b.terms[i].coeff)));

  // constants pick up the gamma factor
  auto c = apply_script_L(RadialExpansion::power(3, 1.0L, 0.0L), {7.5});
  REQUIRE(c.terms.size() == 1);
  CHECK(static_cast<double>(c.terms[0].coeff) == Catch::Approx(7.5));

  // d=3, (Delta+1)^2 |x|^-4 = 360 |x|^-8 + 24 |x|^-6 + |x|^-4
  auto q = apply_script_L(RadialExpansion::power(3, 1.0L, -4.0L), {1.0, 1.0});
  REQUIRE(q.terms.size() == 3);
  CHECK(static_cast<double>(q.terms[0].coeff) == Catch::Approx(360.0));
  CHECK(static_cast<double>(q.terms[0].exponent) == Catch::Approx(-8.0));
  CHECK(static_cast<double>(q.terms[1].coeff) == Catch::Approx(24.0));
  CHECK(static_cast<double>(q.terms[1].exponent) == Catch::Approx(-6.0));
  CHECK(static_cast<double>(q.terms[2].coeff) == Catch::Approx(1.0));
}

TEST_CASE("semifactorial bound on Laplacian powers of |x|^l") {
  // |Delta^m |x|^l| <= C * l!!(l+d-2)!!(2m-1-l)! |x|^{l-2m}; the measured
  // worst ratio over the range is recorded and must stay modest.
  double worst = 0;
  for (int d = 1; d <= 5; ++d) {
    for (int m = 1; m <= 5; ++m) {
      for (int l = 0; l <= 2 * m - 1; ++l) {
        auto e = apply_power_Lm(RadialExpansion::power(d, 1.0L, static_cast<xreal>(l)), m);
        double coeff = 0;
        for (const auto& t : e.terms) {
          REQUIRE(static_cast<double>(t.exponent) == Catch::Approx(l - 2 * m));
          coeff = static_cast<double>(std::abs(t.coeff));
        }
        double bound = semifactorial(l) * semifactorial(l + d - 2);
        for (int i = 2; i <= 2 * m - 1 - l; ++i) bound *= i;
        if (bound > 0) worst = std::max(worst, coeff / bound);
      }
    }
  }
  CHECK(worst <= 16.0);  // recorded constant; see data/calibration.toml
}

TEST_CASE("even-expansion deflation removes exact boundary factors") {
  // (rho^2 - 1)^3 expanded, deflated twice by (y - 1) -> (y - 1)
  RadialExpansion e;
  e.dim = 2;
  e.terms = {{-1.0L, 0.0L}, {3.0L, 2.0L}, {-3.0L, 4.0L}, {1.0L, 6.0L}};
  auto res = deflate_even_expansion(e, 1.0L, 2);
  REQUIRE(res.remainder <= 1e-18L);
  REQUIRE(res.quotient.terms.size() == 2);
  CHECK(static_cast<double>(res.quotient.eval(2.0L)) == Catch::Approx(3.0));  // y - 1 at y = 4
}
