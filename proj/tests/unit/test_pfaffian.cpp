#include <cmath>
#include <random>

#include "hkn.hpp"
#include "pfaffian.hpp"
#include "test_support.hpp"

using namespace whgm;

namespace {

std::array<double, 4> theta_state(int k, int n, double x, double lambda) {
  SeriesControl ctl;
  ctl.eps = 1e-16;
  return hkn_series_theta_lambda({k, n}, x, lambda, ctl);
}

template <std::size_t N>
double max_rel_gap(const Vec<N>& a, const Vec<N>& b) {
  double m = 0.0, s = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    m = std::max(m, std::fabs(a[i] - b[i]));
    s = std::max(s, std::fabs(b[i]));
  }
  return m / s;
}

}  // namespace

TEST_CASE("P4 entries") {
  const Mat<4> p = build_P4(1.0, 3.0, 2, 4);
  CHECK(p[0][0] * 3.0 == doctest::Approx(9.0));
  const Mat<4> q = build_P4(1.0, 1.0, 0, 2);
  CHECK(q[3][3] == doctest::Approx(-2.0));
  CHECK(q[0][2] == doctest::Approx(-1.0));
  CHECK(q[2][3] == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)build_P4(0.0, 1.0, 0, 1), Error);
  CHECK_THROWS_AS((void)build_P4(1.0, 0.0, 0, 1), Error);
  try {
    (void)build_P4(0.0, 1.0, 0, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_point);
  }
}

TEST_CASE("P4 and Q4 act on the theta_lambda state") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(0.3, 4.0);
  std::uniform_int_distribution<int> kd(0, 5), nd(1, 4);
  for (int t = 0; t < 10; ++t) {
    const int k = kd(rng), n = nd(rng);
    const double x = ud(rng), l = ud(rng);
    const double hx = 1e-4 * x, hl = 1e-4 * l;
    const auto f = theta_state(k, n, x, l);
    Vec<4> dx{}, dl{};
    const auto fxp = theta_state(k, n, x + hx, l), fxm = theta_state(k, n, x - hx, l);
    const auto flp = theta_state(k, n, x, l + hl), flm = theta_state(k, n, x, l - hl);
    for (int i = 0; i < 4; ++i) {
      dx[i] = (fxp[i] - fxm[i]) / (2 * hx);
      dl[i] = (flp[i] - flm[i]) / (2 * hl);
    }
    const Vec<4> fv{f[0], f[1], f[2], f[3]};
    CHECK(max_rel_gap(build_P4(x, l, k, n) * fv, dx) < 1e-6);
    CHECK(max_rel_gap(build_Q4(x, l, k, n) * fv, dl) < 1e-6);
  }
}

TEST_CASE("Q4 coefficients") {
  const auto b = q4_coefficients(1.0, 2.0, 0, 3);
  CHECK(b[3] == doctest::Approx(0.0));
  const auto b0 = q4_coefficients(1.0, 1.0, 0, 1);
  CHECK(b0[0] == doctest::Approx(1.0));
  const Mat<4> q = build_Q4(2.0, 4.0, 1, 2);
  const auto c = q4_coefficients(2.0, 4.0, 1, 2);
  for (int j = 0; j < 4; ++j) CHECK(q[3][j] == doctest::Approx(-c[j] / 4.0));
  CHECK(q[0][1] == doctest::Approx(0.25));
}

TEST_CASE("A3_x") {
  const Mat<3> a = build_A3_x(1.0, 1.0, 0, 1);
  CHECK(a[0][0] == 0.0);
  CHECK(a[0][1] == doctest::Approx(std::exp(-1.0)));
  CHECK(a[0][2] == 0.0);
  CHECK(build_A3_x(2.0, 3.0, 0, 1)[2][1] == doctest::Approx(3.0));
  CHECK(build_A3_x_theta(2.0, 3.0, 0, 1)[2][1] == doctest::Approx(6.0));
  CHECK_THROWS_AS((void)build_A3_x(0.0, 1.0, 0, 1), Error);

  SUBCASE("acts on [H, F, theta F]") {
    const int k = 2, n = 3;
    const double x = 2.5, l = 1.5, h = 1e-5;
    auto state = [&](double xx) {
      return Vec<3>{hkn_quadrature({k, n}, xx, l).value.to_double(), of1(n, xx * l).value,
                    of1_theta(n, xx * l).value};
    };
    const Vec<3> s = state(x), sp = state(x + h), sm = state(x - h);
    Vec<3> d{};
    for (int i = 0; i < 3; ++i) d[i] = (sp[i] - sm[i]) / (2 * h);
    CHECK(max_rel_gap(build_A3_x(x, l, k, n) * s, d) < 1e-8);
  }
}

TEST_CASE("A3_phi") {
  const Mat<3> a = build_A3_phi(1.0, 0.0, 0, 1);
  const Mat<3> expect{{{0.0, 2.0 * std::exp(-1.0), 0.0}, {0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(a[i][j] == doctest::Approx(expect[i][j]).epsilon(1e-15));
  CHECK(build_A3_phi(1.0, 2.0, 0, 3)[2][2] == doctest::Approx(-12.0));
  CHECK_THROWS_AS((void)build_A3_phi(0.0, 1.0, 0, 1), Error);

  SUBCASE("scaled variant carries the (1,2) entry as a log") {
    const auto s = build_A3_phi_scaled(1e4, 1e4, 0, 1);
    CHECK(std::isfinite(s.log_a12));
    CHECK(s.log_a12 == doctest::Approx(std::log(2.0) + std::log(1e4) + 1e8));
    CHECK(s.m[2][2] == doctest::Approx(-4.0 * 1e4));
  }
  SUBCASE("change of variables from A3_x") {
    const int k = 1, n = 2;
    const double phi = 1.7, psi = 0.8, l = psi * psi;
    auto g = [&](double p) {
      const double xx = p * p, z = xx * l, e = std::exp(-2.0 * p * psi);
      return Vec<3>{hkn_quadrature({k, n}, xx, l).value.to_double(), e * of1(n, z).value,
                    e * (2.0 * of1_theta(n, z).value - 2.0 * p * psi * of1(n, z).value)};
    };
    const double h = 1e-5;
    const Vec<3> s = g(phi), sp = g(phi + h), sm = g(phi - h);
    Vec<3> d{};
    for (int i = 0; i < 3; ++i) d[i] = (sp[i] - sm[i]) / (2 * h);
    CHECK(max_rel_gap(build_A3_phi(phi, psi, k, n) * s, d) < 1e-8);
  }
}

TEST_CASE("G2 exponent") {
  CHECK(g2_exponent(0.0, 3.0) == 0.0);
  CHECK(g2_exponent(6.0, 3.0) == doctest::Approx(0.0));
  CHECK(g2_exponent(3.0, 3.0) == doctest::Approx(9.0));
  for (double phi = 0.1; phi < 6.0; phi += 0.1) CHECK(g2_exponent(phi, 3.0) <= 9.0 + 1e-12);
}

TEST_CASE("gauges") {
  SUBCASE("identity gauge leaves the matrix unchanged") {
    GaugeTransform<3> id{[](double) { return identity<3>(); }, [](double) { return Mat<3>{}; }};
    const auto sys = system_A3_phi(1.3, 2, 3);
    const auto g = apply_gauge(sys, id);
    CHECK(max_norm(g.matrix(0.7) - sys.matrix(0.7)) == 0.0);
  }
  SUBCASE("G2 removes the exponential from the (1,2) entry") {
    const int k = 2, n = 3;
    const double psi = 4.0, phi = 1.5;
    const Mat<3> m = apply_gauge(system_A3_phi(psi, k, n), gauge_G2(psi)).matrix(phi);
    CHECK(m[0][1] == doctest::Approx(2.0 * std::pow(phi, 2 * k + 1)).epsilon(1e-13));
    CHECK(m[0][0] == doctest::Approx(2.0 * phi - 2.0 * psi).epsilon(1e-13));
    const Mat<3> a = build_A3_phi(phi, psi, k, n);
    CHECK(m[1][2] == doctest::Approx(a[1][2]));
    CHECK(m[2][1] == doctest::Approx(a[2][1]));
    CHECK(m[2][2] == doctest::Approx(a[2][2]));
  }
  SUBCASE("G3 is a pure conjugation") {
    const double psi = 2.0;
    const auto g3 = gauge_G3(psi);
    CHECK(max_norm(g3.g_prime(3.0)) == 0.0);
    const Mat<3> m = apply_gauge(system_A3_phi(psi, 1, 2), g3).matrix(3.0);
    const Mat<3> a = build_A3_phi(3.0, psi, 1, 2);
    CHECK(m[0][1] == doctest::Approx(a[0][1] * std::exp(-psi * psi)));
    CHECK(m[0][0] == 0.0);
  }
  SUBCASE("gauge round trip") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ud(0.2, 3.0);
    for (int t = 0; t < 50; ++t) {
      const double psi = ud(rng), phi = ud(rng);
      const auto sys = system_A3_phi(psi, 1, 3);
      for (const auto& g : {gauge_G2(psi), gauge_G3(psi)}) {
        const auto back = apply_gauge(apply_gauge(sys, g), invert_gauge(g));
        const Mat<3> a = sys.matrix(phi);
        CHECK(max_norm(back.matrix(phi) - a) <= 1e-10 * max_norm(a));
      }
    }
  }
  SUBCASE("numerical derivative for gauges without g_prime") {
    const double psi = 1.2, phi = 0.9;
    GaugeTransform<3> g = gauge_G2(psi);
    GaugeTransform<3> fd{g.g, {}};
    const auto sys = system_A3_phi(psi, 0, 2);
    const Mat<3> a = apply_gauge(sys, g).matrix(phi), b = apply_gauge(sys, fd).matrix(phi);
    CHECK(max_norm(a - b) <= 1e-8 * max_norm(a));
  }
  SUBCASE("4-D round trip") {
    GaugeTransform<4> g{[](double t) {
                          Mat<4> m = identity<4>();
                          m[0][1] = t;
                          m[3][3] = 1.0 + t * t;
                          return m;
                        },
                        {}};
    const auto sys = system_P4(2.0, 1, 3);
    const auto back = apply_gauge(apply_gauge(sys, g), invert_gauge(g));
    CHECK(max_norm(back.matrix(1.4) - sys.matrix(1.4)) <= 1e-8 * max_norm(sys.matrix(1.4)));
  }
  SUBCASE("singular gauge") {
    GaugeTransform<3> g{[](double) { return Mat<3>{}; }, [](double) { return Mat<3>{}; }};
    CHECK_THROWS_AS((void)apply_gauge(system_A3_phi(1.0, 0, 1), g).matrix(1.0), Error);
  }
  CHECK_THROWS_AS((void)gauge_G2(-1.0), Error);
}

TEST_CASE("integrability of the P, Q pair") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ud(0.5, 20.0);
  std::uniform_int_distribution<int> kd(0, 9), nd(1, 6);
  double worst = 0.0, worst_deriv = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto r = integrability_residual(ud(rng), ud(rng), kd(rng), nd(rng));
    CHECK(r.residual < 1e-6 * r.scale);
    worst = std::max(worst, r.residual / r.scale);
    worst_deriv = std::max(worst_deriv, r.derivative_only / r.scale);
  }
  // Without the commutator the condition fails.
  CHECK(worst_deriv > 1e-3);
  MESSAGE("full residual ", worst, ", derivative-only ", worst_deriv);
}
