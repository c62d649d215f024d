#include "pfaffian.hpp"

#include <cmath>

#include "errors.hpp"

namespace whgm {

namespace {

void need_positive(double v, const char* what) {
  require(v > 0.0 && std::isfinite(v), ErrorCode::singular_point, std::string(what) + " must be > 0 (singular point at 0)");
}

template <std::size_t N>
Mat<N> central_diff(const std::function<Mat<N>(double)>& f, double t) {
  const double h = 1e-5 * std::max(1.0, std::fabs(t));
  return scaled(f(t + h) - f(t - h), 0.5 / h);
}

template <std::size_t N>
GaugeTransform<N> invert_gauge_impl(const GaugeTransform<N>& g) {
  GaugeTransform<N> out;
  out.g = [gf = g.g](double t) { return inverse(gf(t)); };
  out.g_prime = [g](double t) {
    const Mat<N> gi = inverse(g.g(t));
    const Mat<N> gp = g.g_prime ? g.g_prime(t) : central_diff(g.g, t);
    return scaled(gi * gp * gi, -1.0);
  };
  return out;
}

template <std::size_t N>
OdeSystem<N> apply_gauge_impl(const OdeSystem<N>& sys, const GaugeTransform<N>& g) {
  OdeSystem<N> out;
  out.tag = sys.tag;
  out.matrix = [sys, g](double t) {
    const Mat<N> gm = g.g(t);
    const Mat<N> gi = inverse(gm);
    const Mat<N> gp = g.g_prime ? g.g_prime(t) : central_diff(g.g, t);
    return gi * sys.matrix(t) * gm - gi * gp;
  };
  return out;
}

}  // namespace

template <std::size_t N>
Mat<N> inverse(const Mat<N>& a) {
  Mat<N> m = a;
  Mat<N> inv = identity<N>();
  double scale = max_norm(a);
  require(scale > 0.0 && std::isfinite(scale), ErrorCode::singular_point, "gauge matrix is singular");
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < N; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    require(m[piv][c] != 0.0, ErrorCode::singular_point, "gauge matrix is singular");
    std::swap(m[piv], m[c]);
    std::swap(inv[piv], inv[c]);
    const double d = m[c][c];
    for (std::size_t j = 0; j < N; ++j) {
      m[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < N; ++r) {
      if (r == c || m[r][c] == 0.0) continue;
      const double f = m[r][c];
      for (std::size_t j = 0; j < N; ++j) {
        m[r][j] -= f * m[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

template Mat<3> inverse<3>(const Mat<3>&);
template Mat<4> inverse<4>(const Mat<4>&);

Mat<4> build_P4(double x, double lambda, int k, int n) {
  need_positive(x, "x");
  need_positive(lambda, "lambda");
  const double l = lambda, nm = n - 1.0, K = k + 1.0;
  const double a1 = K * l;
  const double a2 = l - n + 1.0;
  const double a3 = K * l + nm;
  const double a5 = K * x * l * l;
  const double a6 = x * l * l - nm * (x * l + K * l + nm);
  const double a7 = -(x + nm) * l + nm * (n - 2.0);
  const double a8 = -(n - 2.0) * K * x * l * l;
  const double a9 = (k - n + 3.0) * x * l * l + nm * nm * (x * l + K * l + nm);
  const double a10 = x * l * l + nm * nm * (l - n + 2.0);
  const double a11 = -x * l - nm * nm;
  Mat<4> m{{{a1, a2, -1.0, 0.0}, {0.0, a3, a2 + 1.0, -1.0}, {a5, a6, a7, nm}, {a8, a9, a10, a11}}};
  return scaled(m, 1.0 / (x * l));
}

std::array<double, 4> q4_coefficients(double x, double lambda, int k, int n) {
  const double l = lambda, nn = n;
  return {(k + 1.0) * x * l * l,
          x * l * l - (nn - 1.0) * x * l - (k + 1.0) * (nn - 1.0) * l - (nn - 2.0) * (nn - 1.0),
          nn * nn - 5.0 * nn + 5.0 - (x + k + nn) * l,
          2.0 * nn - 4.0 - l};
}

Mat<4> build_Q4(double x, double lambda, int k, int n) {
  need_positive(lambda, "lambda");
  require(x >= 0.0, ErrorCode::domain, "x must be >= 0");
  const auto b = q4_coefficients(x, lambda, k, n);
  Mat<4> m{{{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {-b[0], -b[1], -b[2], -b[3]}}};
  return scaled(m, 1.0 / lambda);
}

Mat<3> build_A3_x(double x, double lambda, int k, int n) {
  need_positive(x, "x");
  return Mat<3>{{{0.0, std::pow(x, k) * std::exp(-x), 0.0}, {0.0, 0.0, 1.0 / x}, {0.0, lambda, -(n - 1.0) / x}}};
}

Mat<3> build_A3_x_theta(double x, double lambda, int k, int n) {
  need_positive(x, "x");
  return Mat<3>{{{0.0, std::pow(x, k + 1) * std::exp(-x), 0.0}, {0.0, 0.0, 1.0}, {0.0, x * lambda, -(n - 1.0)}}};
}

double g2_exponent(double phi, double psi) { return -phi * phi + 2.0 * phi * psi; }

Mat<3> build_A3_phi(double phi, double psi, int k, int n) {
  const ScaledMat3 s = build_A3_phi_scaled(phi, psi, k, n);
  Mat<3> m = s.m;
  m[0][1] = std::exp(s.log_a12);
  return m;
}

ScaledMat3 build_A3_phi_scaled(double phi, double psi, int k, int n) {
  need_positive(phi, "phi");
  const double pp = phi * psi;
  ScaledMat3 s;
  s.m = Mat<3>{{{0.0, 0.0, 0.0},
                {0.0, 0.0, 1.0 / phi},
                {0.0, -2.0 * (2.0 * n - 1.0) * psi, -(4.0 * pp + 2.0 * (n - 1.0)) / phi}}};
  s.log_a12 = std::log(2.0) + (2.0 * k + 1.0) * std::log(phi) + g2_exponent(phi, psi);
  return s;
}

OdeSystem<4> system_P4(double lambda, int k, int n) {
  return {[=](double x) { return build_P4(x, lambda, k, n); }, VariableTag::x};
}
OdeSystem<4> system_Q4(double x, int k, int n) {
  return {[=](double l) { return build_Q4(x, l, k, n); }, VariableTag::lambda};
}
OdeSystem<3> system_A3_x(double lambda, int k, int n) {
  return {[=](double x) { return build_A3_x(x, lambda, k, n); }, VariableTag::x};
}
OdeSystem<3> system_A3_phi(double psi, int k, int n) {
  return {[=](double phi) { return build_A3_phi(phi, psi, k, n); }, VariableTag::phi};
}

GaugeTransform<3> gauge_G2(double psi) {
  require(psi >= 0.0, ErrorCode::domain, "gauge_G2: psi must be >= 0");
  GaugeTransform<3> g;
  g.g = [psi](double phi) {
    Mat<3> m = identity<3>();
    m[0][0] = std::exp(g2_exponent(phi, psi));
    return m;
  };
  g.g_prime = [psi](double phi) {
    Mat<3> m{};
    m[0][0] = (2.0 * psi - 2.0 * phi) * std::exp(g2_exponent(phi, psi));
    return m;
  };
  return g;
}

GaugeTransform<3> gauge_G3(double psi) {
  require(psi >= 0.0, ErrorCode::domain, "gauge_G3: psi must be >= 0");
  GaugeTransform<3> g;
  g.g = [psi](double) {
    Mat<3> m = identity<3>();
    m[0][0] = std::exp(psi * psi);
    return m;
  };
  g.g_prime = [](double) { return Mat<3>{}; };
  return g;
}

GaugeTransform<3> invert_gauge(const GaugeTransform<3>& g) { return invert_gauge_impl(g); }
GaugeTransform<4> invert_gauge(const GaugeTransform<4>& g) { return invert_gauge_impl(g); }
OdeSystem<3> apply_gauge(const OdeSystem<3>& sys, const GaugeTransform<3>& g) { return apply_gauge_impl(sys, g); }
OdeSystem<4> apply_gauge(const OdeSystem<4>& sys, const GaugeTransform<4>& g) { return apply_gauge_impl(sys, g); }

IntegrabilityResidual integrability_residual(double x, double lambda, int k, int n) {
  const double hx = 1e-5 * std::max(1.0, x), hl = 1e-5 * std::max(1.0, lambda);
  const Mat<4> P = build_P4(x, lambda, k, n), Q = build_Q4(x, lambda, k, n);
  const Mat<4> dP = scaled(build_P4(x, lambda + hl, k, n) - build_P4(x, lambda - hl, k, n), 0.5 / hl);
  const Mat<4> dQ = scaled(build_Q4(x + hx, lambda, k, n) - build_Q4(x - hx, lambda, k, n), 0.5 / hx);
  IntegrabilityResidual r;
  r.derivative_only = max_norm(dP - dQ);
  r.residual = max_norm(dP - dQ + P * Q - Q * P);
  r.scale = max_norm(P) * max_norm(Q) + max_norm(dP);
  return r;
}

}  // namespace whgm
