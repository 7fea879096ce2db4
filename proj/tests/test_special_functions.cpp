#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fppm/rng.hpp"
#include "fppm/special_functions.hpp"

using namespace fppm;

// Closed forms used as oracles below:
//   chi2(2):   CDF(x) = 1 - exp(-x/2)          => quantile(1/2) = 2 ln 2
//   F(2,2):    CDF(x) = x/(1+x)                => quantile(0.95) = 19
//   F(1,1):    CDF(x) = (2/pi) atan(sqrt(x))   => quantile(0.5)  = 1
//   gamma a=1: P(1,x) = 1 - exp(-x)

TEST_CASE("incomplete gamma closed form at a=1") {
  for (double x : {0.01, 0.5, 1.0, 3.0, 20.0})
    CHECK(reg_lower_gamma(1.0, x) ==
          doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
  CHECK(reg_lower_gamma(3.5, 0.0) == 0.0);
}

TEST_CASE("incomplete beta symmetry and endpoints") {
  RngStream rng(3);
  for (int i = 0; i < 200; ++i) {
    const double a = 0.5 + 10 * rng.next_double();
    const double b = 0.5 + 10 * rng.next_double();
    const double x = rng.next_double();
    const double lhs = reg_inc_beta(a, b, x);
    const double rhs = 1.0 - reg_inc_beta(b, a, 1.0 - x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
  CHECK(reg_inc_beta(2, 3, 0.0) == 0.0);
  CHECK(reg_inc_beta(2, 3, 1.0) == 1.0);
  // I_x(1,1) = x.
  CHECK(reg_inc_beta(1, 1, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("chi-squared quantile closed form, df=2") {
  const double q = chi2_quantile(0.5, 2.0);
  CHECK(q == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-8));
  CHECK(chi2_cdf(q, 2.0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("upper chi-squared tail used by the count test") {
  // 0.99 quantile at 11 degrees of freedom.
  CHECK(chi2_quantile(0.99, 11.0) == doctest::Approx(24.724).epsilon(5e-4));
}

TEST_CASE("F quantile closed forms") {
  CHECK(f_quantile(0.95, 2.0, 2.0) == doctest::Approx(19.0).epsilon(1e-8));
  CHECK(f_quantile(0.5, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(f_cdf(19.0, 2.0, 2.0) == doctest::Approx(0.95).epsilon(1e-10));
}

TEST_CASE("F quantile approaches the chi-squared limit for huge d2") {
  const double q = f_quantile(0.99, 11.0, 1e9);
  CHECK(q > 2.24);
  CHECK(q < 2.26);
  // The limit is chi2_quantile(p, d1)/d1.
  CHECK(q == doctest::Approx(chi2_quantile(0.99, 11.0) / 11.0).epsilon(1e-6));
}

TEST_CASE("quantile round trips") {
  for (double p : {0.05, 0.5, 0.9, 0.99, 0.999}) {
    for (double df : {1.0, 2.0, 5.0, 11.0, 100.0}) {
      const double x = chi2_quantile(p, df);
      CHECK(chi2_cdf(x, df) == doctest::Approx(p).epsilon(1e-7));
    }
    for (double d1 : {1.0, 2.0, 11.0, 40.0}) {
      for (double d2 : {1.0, 2.0, 11.0, 1188.0, 1e8}) {
        const double x = f_quantile(p, d1, d2);
        CHECK(f_cdf(x, d1, d2) == doctest::Approx(p).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("quantiles are monotone in p") {
  double prev = 0;
  for (double p = 0.05; p < 1.0; p += 0.05) {
    const double q = f_quantile(p, 11.0, 132.0);
    CHECK(q > prev);
    prev = q;
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(chi2_quantile(0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(chi2_quantile(1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(chi2_quantile(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(f_quantile(0.5, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(f_cdf(1.0, 1.0, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(reg_lower_gamma(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(reg_inc_beta(1.0, 0.0, 0.5), std::invalid_argument);
}
