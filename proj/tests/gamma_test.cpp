#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "ppt/gamma.hpp"
#include "support/oracles.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("log_gamma matches exact factorials", "[gamma]") {
  for (int n = 1; n <= 170; ++n) {
    const double expected = std::log(oracles::exact_factorial(n));
    REQUIRE_THAT(ppt::log_gamma(n + 1.0), WithinRel(expected, 1e-13));
  }
}

TEST_CASE("log_gamma matches half-integer closed forms", "[gamma]") {
  // Gamma(n + 1/2) = (2n)! / (4^n n!) * sqrt(pi)
  for (int n = 0; n <= 12; ++n) {
    const double expected = std::log(oracles::exact_factorial(2 * n)) -
                            n * std::log(4.0) - std::log(oracles::exact_factorial(n)) +
                            0.5 * std::log(std::numbers::pi);
    REQUIRE_THAT(ppt::log_gamma(n + 0.5), WithinAbs(expected, 1e-12));
  }
}

TEST_CASE("log_gamma at a large argument", "[gamma]") {
  REQUIRE_THAT(ppt::log_gamma(1e6), WithinRel(12815504.569147611, 1e-13));
}

TEST_CASE("log_gamma rejects nonpositive arguments", "[gamma]") {
  REQUIRE_THROWS_AS(ppt::log_gamma(0.0), std::domain_error);
  REQUIRE_THROWS_AS(ppt::log_gamma(-1.0), std::domain_error);
  REQUIRE_THROWS_AS(ppt::log_gamma(-0.5), std::domain_error);
}

TEST_CASE("upper gamma matches the Erlang tail sum at integer shape", "[gamma]") {
  // Q(n, x) = exp(-x) * sum_{k<n} x^k / k!  (exact for integer n)
  for (int n : {1, 2, 3, 5, 8, 13, 16}) {
    for (double x : {0.05, 0.5, 1.0, 2.0, 0.5 * n, 1.0 * n, 2.0 * n, 40.0}) {
      if (x <= 0.0) continue;
      double term = 1.0;
      double sum = 1.0;
      for (int k = 1; k < n; ++k) {
        term *= x / k;
        sum += term;
      }
      const double expected = std::exp(-x) * sum;
      REQUIRE_THAT(ppt::reg_upper_gamma(n, x), WithinAbs(expected, 1e-13));
    }
  }
}

TEST_CASE("lower and upper halves are complementary across the branch seam", "[gamma]") {
  for (double a : {0.5, 1.0, 3.0, 8.0, 64.0, 200.0}) {
    for (double f : {0.02, 0.3, 0.9, 0.999, 1.001, 1.1, 2.0, 4.0}) {
      const double x = f * (a + 1.0);  // straddles the series/continued-fraction split
      const double p = ppt::reg_lower_gamma(a, x);
      const double q = ppt::reg_upper_gamma(a, x);
      REQUIRE(p >= 0.0);
      REQUIRE(p <= 1.0);
      REQUIRE_THAT(p + q, WithinAbs(1.0, 1e-13));
    }
  }
}

TEST_CASE("lower gamma is nondecreasing in x", "[gamma]") {
  for (double a : {1.0, 4.0, 64.0}) {
    double prev = 0.0;
    for (int i = 1; i <= 60; ++i) {
      const double x = i * (a + 10.0 * std::sqrt(a)) / 60.0;
      const double p = ppt::reg_lower_gamma(a, x);
      REQUIRE(p >= prev);
      prev = p;
    }
  }
}

TEST_CASE("lower gamma agrees with adaptive quadrature", "[gamma]") {
  std::mt19937 rng(7151);
  std::uniform_real_distribution<double> shape(1.0, 200.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const double a = shape(rng);
    const double x = unit(rng) * (a + 10.0 * std::sqrt(a)) + 1e-6;
    const double lib = ppt::reg_lower_gamma(a, x);
    const double ref = oracles::reg_lower_gamma_quad(a, x);
    REQUIRE_THAT(lib, WithinAbs(ref, 1e-8));
  }
}

TEST_CASE("tail inversion round-trips", "[gamma]") {
  for (double a : {1.0, 2.0, 8.0, 16.0, 64.0, 170.3}) {
    for (double p : {1e-12, 1e-8, 1e-4, 1e-2, 0.1, 0.5, 0.9, 0.999}) {
      const double x = ppt::inv_reg_upper_gamma(a, p);
      REQUIRE(x > 0.0);
      REQUIRE_THAT(ppt::reg_upper_gamma(a, x), WithinAbs(p, 1e-9 * p));
    }
  }
}

TEST_CASE("tail inversion rejects bad arguments", "[gamma]") {
  REQUIRE_THROWS_AS(ppt::inv_reg_upper_gamma(0.0, 0.5), std::domain_error);
  REQUIRE_THROWS_AS(ppt::inv_reg_upper_gamma(2.0, 0.0), std::domain_error);
  REQUIRE_THROWS_AS(ppt::inv_reg_upper_gamma(2.0, 1.0), std::domain_error);
}

TEST_CASE("pinned incomplete-gamma values", "[gamma]") {
  REQUIRE_THAT(ppt::reg_lower_gamma(8.0, 3.1562), WithinRel(0.015644042056896026, 1e-12));
  REQUIRE_THAT(ppt::reg_lower_gamma(64.0, 64.0 / 60.0 * 30.7),
               WithinRel(8.784419240118923e-07, 1e-10));
  REQUIRE_THAT(ppt::inv_reg_upper_gamma(64.0, 1e-4), WithinRel(98.10560901562505, 1e-9));
  REQUIRE_THAT(ppt::inv_reg_upper_gamma(16.0, 1e-4), WithinRel(35.28562378767124, 1e-9));
}

TEST_CASE("gamma law moments and CDF wiring", "[gamma]") {
  const ppt::GammaLaw law{3.0, 2.0};
  REQUIRE_THAT(law.mean(), WithinRel(1.5, 1e-15));
  REQUIRE_THAT(law.variance(), WithinRel(0.75, 1e-15));
  for (double x : {0.1, 0.7, 1.5, 4.0}) {
    REQUIRE_THAT(ppt::gamma_cdf(law, x), WithinRel(ppt::reg_lower_gamma(3.0, 2.0 * x), 1e-15));
  }
  REQUIRE(ppt::gamma_cdf(law, 0.0) == 0.0);
  REQUIRE_THROWS_AS(ppt::gamma_cdf(law, -0.1), std::domain_error);
  REQUIRE_THROWS_AS(ppt::gamma_cdf(ppt::GammaLaw{0.0, 1.0}, 1.0), std::domain_error);
}
