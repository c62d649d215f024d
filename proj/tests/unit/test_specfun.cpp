#include <cmath>
#include <random>

#include "specfun.hpp"
#include "test_support.hpp"

using namespace whgm;

TEST_CASE("pochhammer") {
  CHECK(pochhammer(3, 0) == 1.0);
  CHECK(pochhammer(1, 5) == 120.0);
  CHECK(pochhammer(2.5, 3) == doctest::Approx(39.375).epsilon(1e-15));

  SUBCASE("log form agrees with the product") {
    for (double a : {0.5, 1.0, 2.5, 7.0}) {
      for (int i : {0, 1, 5, 40, 120}) {
        const double p = pochhammer(a, i);
        if (!std::isfinite(p)) continue;
        const auto lp = log_pochhammer(a, i);
        CHECK(lp.sign == 1);
        CHECK_REL(lp.log_abs, std::log(p), 1e-12);
      }
    }
  }
  SUBCASE("log form past overflow") {
    CHECK(std::isinf(pochhammer(1, 200)));
    CHECK_REL(log_pochhammer(1, 200).log_abs, std::lgamma(201.0), 1e-12);
  }
  SUBCASE("negative base gives a sign") {
    CHECK(pochhammer(-0.5, 2) == doctest::Approx(-0.25));
    CHECK(log_pochhammer(-0.5, 2).sign == -1);
  }
}

TEST_CASE("of1 series") {
  CHECK(of1(3, 0.0).value == 1.0);
  CHECK(of1(3, 0.0).terms >= 1);
  CHECK_REL(of1(1, 1.0).value, 2.2795853023360673, 1e-15);
  CHECK_REL(of1(3, 25.0).value, 182.52151741808028, 1e-14);
  CHECK_REL(of1(2, 100.0).value, 4245497.338512777, 1e-13);
  CHECK(of1(1, 1.0).terms < 30);

  SUBCASE("max_terms exhausted carries the partial sum") {
    SeriesControl ctl;
    ctl.max_terms = 3;
    try {
      (void)of1(1, 50.0, ctl);
      FAIL("expected SeriesNotConverged");
    } catch (const SeriesNotConverged& e) {
      CHECK(e.terms_used == 3);
      CHECK(e.partial_sum > 1.0);
      CHECK(e.code() == ErrorCode::not_converged);
    }
  }
  SUBCASE("compensated summation agrees") {
    SeriesControl ctl;
    ctl.summation = Summation::compensated;
    CHECK_REL(of1(2, 100.0, ctl).value, 4245497.338512777, 1e-14);
  }
  SUBCASE("invalid control") {
    SeriesControl bad;
    bad.eps = 0.0;
    CHECK_THROWS_AS((void)of1(1, 1.0, bad), Error);
    CHECK_THROWS_AS((void)of1(1, -1.0), Error);
    CHECK_THROWS_AS((void)of1(0, 1.0), Error);
  }
}

TEST_CASE("of1 asymptotic form") {
  CHECK_REL(of1_asymptotic(1, 1e4), 2.0396871734097246e+85, 1e-2);
  CHECK_REL(of1_asymptotic(2, 100.0), 4245497.338512777, 2e-2);

  SUBCASE("constant is the large-z limit of the ratio") {
    for (int n : {1, 2, 3, 6}) {
      const double z = 1e10;
      const double ratio = std::exp(log_of1(n, z) - (2.0 * std::sqrt(z) + (0.5 - n) * std::log(std::sqrt(z))));
      CHECK_REL(ratio, of1_asymptotic_constant(n), 1e-3);
    }
  }
  SUBCASE("monotone in z") {
    double prev = 0.0;
    for (double z = 100.0; z < 1e5; z *= 1.7) {
      const double v = log_of1_asymptotic(3, z);
      CHECK(v > prev);
      prev = v;
    }
  }
  SUBCASE("log form at huge z") {
    const double l10 = log_of1_asymptotic(1, 1e16) / std::log(10.0);
    CHECK(std::isfinite(l10));
    CHECK(std::fabs(l10 - 2e8 * std::log10(std::exp(1.0))) < 10.0);
    CHECK(std::isinf(of1_asymptotic(1, 1e16)));
  }
  SUBCASE("log_of1 matches the series on both sides of the switch") {
    for (int n : {1, 3}) {
      for (double z : {50.0, 9000.0, 11000.0, 40000.0}) {
        CHECK_REL(log_of1(n, z), std::log(of1(n, z).value), 1e-13);
      }
    }
    CHECK_REL(log_of1(1, 1e4), std::log(2.0396871734097246e+85), 1e-13);
  }
}

TEST_CASE("of1_theta") {
  CHECK(of1_theta(3, 0.0).value == 0.0);
  CHECK_REL(of1_theta(1, 1.0).value, 1.5906368546373291, 1e-15);
  SUBCASE("finite difference at z = 5") {
    const double z = 5.0, h = 1e-5;
    const double fd = z * (of1(2, z + h).value - of1(2, z - h).value) / (2 * h);
    CHECK_REL(of1_theta(2, z).value, fd, 1e-6);
  }
  SUBCASE("ratio form") {
    CHECK_REL(of1_theta_ratio(1, 1.0), 1.5906368546373291 / 2.2795853023360673, 1e-14);
    CHECK_REL(of1_theta_ratio(3, 1e6), std::sqrt(1e6), 2e-3);
  }
}

TEST_CASE("of1_exp_scaled") {
  for (int n : {1, 4}) {
    for (double y : {0.5, 5.0, 14.0, 20.0}) {
      CHECK_REL(of1_exp_scaled(n, y), std::exp(-y) * of1(n, y * y / 4.0).value, 1e-13);
    }
  }
  CHECK(std::isfinite(of1_exp_scaled(1, 2e8)));
  CHECK_REL(of1_exp_scaled(1, 2e8), std::exp(log_of1(1, 1e16) - 2e8), 1e-7);
}

TEST_CASE("incomplete gamma") {
  CHECK_REL(lower_incomplete_gamma(1, 1), 1.0 - std::exp(-1.0), 1e-15);
  CHECK_REL(lower_incomplete_gamma(3, 1e3), 2.0, 1e-15);
  CHECK_REL(lower_incomplete_gamma(2.5, 3), 0.92227121230783402, 1e-13);
  CHECK(lower_incomplete_gamma(2, 0) == 0.0);
  CHECK_REL(regularized_gamma_p(3, 2), lower_incomplete_gamma(3, 2) / 2.0, 1e-14);
  CHECK_REL(log_lower_incomplete_gamma(2.5, 3), std::log(0.92227121230783402), 1e-14);
  CHECK(std::isfinite(log_lower_incomplete_gamma(400.0, 1e3)));
  CHECK_THROWS_AS((void)lower_incomplete_gamma(0.0, 1.0), Error);
  CHECK_THROWS_AS((void)lower_incomplete_gamma(1.0, -1.0), Error);
}

TEST_CASE("of1 properties") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> nd(1, 8);
  std::uniform_real_distribution<double> zd(0.0, 30.0);
  SUBCASE("at least one and increasing") {
    for (int t = 0; t < 50; ++t) {
      const int n = nd(rng);
      const double z = zd(rng);
      const double a = of1(n, z).value, b = of1(n, z + 0.1).value;
      CHECK(a >= 1.0);
      CHECK(b > a);
    }
  }
  SUBCASE("ODE residual theta(theta + n - 1) F = z F") {
    for (int t = 0; t < 50; ++t) {
      const int n = nd(rng);
      const double z = 0.5 + zd(rng);
      const double h = 1e-4 * z;
      auto th = [&](double zz) { return of1_theta(n, zz).value; };
      const double theta2 = z * (th(z + h) - th(z - h)) / (2 * h);
      const double lhs = theta2 + (n - 1) * th(z);
      const double rhs = z * of1(n, z).value;
      CHECK(std::fabs(lhs - rhs) <= 1e-6 * (std::fabs(theta2) + (n - 1) * th(z) + std::fabs(rhs)));
    }
  }
  SUBCASE("theta equals z d/dz") {
    for (int t = 0; t < 50; ++t) {
      const int n = nd(rng);
      const double z = 0.5 + zd(rng);
      const double h = 1e-4 * z;
      const double fd = z * (of1(n, z + h).value - of1(n, z - h).value) / (2 * h);
      CHECK_REL(of1_theta(n, z).value, fd, 1e-6);
    }
  }
}
