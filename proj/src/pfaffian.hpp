#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

namespace whgm {

template <std::size_t N>
using Vec = std::array<double, N>;
template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

enum class VariableTag { x, lambda, phi };

template <std::size_t N>
struct OdeSystem {
  std::function<Mat<N>(double)> matrix;
  VariableTag tag = VariableTag::x;
};

/// f = G h; g_prime may be left empty to use central differences.
template <std::size_t N>
struct GaugeTransform {
  std::function<Mat<N>(double)> g;
  std::function<Mat<N>(double)> g_prime;
};

// Small dense helpers.
template <std::size_t N>
Mat<N> identity() {
  Mat<N> m{};
  for (std::size_t i = 0; i < N; ++i) m[i][i] = 1.0;
  return m;
}

template <std::size_t N>
Mat<N> operator*(const Mat<N>& a, const Mat<N>& b) {
  Mat<N> c{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < N; ++k)
      for (std::size_t j = 0; j < N; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

template <std::size_t N>
Vec<N> operator*(const Mat<N>& a, const Vec<N>& v) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r[i] += a[i][j] * v[j];
  return r;
}

template <std::size_t N>
Mat<N> operator-(const Mat<N>& a, const Mat<N>& b) {
  Mat<N> c{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) c[i][j] = a[i][j] - b[i][j];
  return c;
}

template <std::size_t N>
Mat<N> operator+(const Mat<N>& a, const Mat<N>& b) {
  Mat<N> c{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) c[i][j] = a[i][j] + b[i][j];
  return c;
}

template <std::size_t N>
Mat<N> scaled(const Mat<N>& a, double s) {
  Mat<N> c = a;
  for (auto& row : c)
    for (auto& v : row) v *= s;
  return c;
}

template <std::size_t N>
double max_norm(const Mat<N>& a) {
  double m = 0.0;
  for (const auto& row : a)
    for (double v : row) m = std::max(m, std::fabs(v));
  return m;
}

/// Gauss-Jordan inverse with partial pivoting; throws singular_point on failure.
template <std::size_t N>
Mat<N> inverse(const Mat<N>& a);

Mat<4> build_P4(double x, double lambda, int k, int n);
Mat<4> build_Q4(double x, double lambda, int k, int n);
/// Coefficients b0..b3 of the fourth-order theta_lambda equation.
std::array<double, 4> q4_coefficients(double x, double lambda, int k, int n);

/// d/dx of [H, 0F1(;n;x lambda), theta_x 0F1(;n;x lambda)].
Mat<3> build_A3_x(double x, double lambda, int k, int n);
/// Same system written with theta_x on the left-hand side.
Mat<3> build_A3_x_theta(double x, double lambda, int k, int n);

/// d/dphi of [H, v, theta_phi v] with x = phi^2, v = e^{-2 phi psi} 0F1(;n;phi^2 psi^2).
Mat<3> build_A3_phi(double phi, double psi, int k, int n);

/// A3_phi with the (1,2) entry carried as a logarithm (entry = e^{log_a12}).
struct ScaledMat3 {
  Mat<3> m;
  double log_a12;
};
ScaledMat3 build_A3_phi_scaled(double phi, double psi, int k, int n);

OdeSystem<4> system_P4(double lambda, int k, int n);
OdeSystem<4> system_Q4(double x, int k, int n);
OdeSystem<3> system_A3_x(double lambda, int k, int n);
OdeSystem<3> system_A3_phi(double psi, int k, int n);

/// Exponent -phi^2 + 2 phi psi of the G2 gauge.
double g2_exponent(double phi, double psi);

GaugeTransform<3> gauge_G2(double psi);
GaugeTransform<3> gauge_G3(double psi);
/// G^{-1}, with derivative -G^{-1} G' G^{-1}.
GaugeTransform<3> invert_gauge(const GaugeTransform<3>& g);
GaugeTransform<4> invert_gauge(const GaugeTransform<4>& g);

/// Matrix G^{-1} A G - G^{-1} G'.
OdeSystem<3> apply_gauge(const OdeSystem<3>& sys, const GaugeTransform<3>& g);
OdeSystem<4> apply_gauge(const OdeSystem<4>& sys, const GaugeTransform<4>& g);

/// Max-norm of dP/dlambda - dQ/dx + PQ - QP by central differences.
struct IntegrabilityResidual {
  double residual;
  /// ||P|| ||Q|| + ||dP/dlambda||, the scale the residual is compared against.
  double scale;
  /// Max-norm of dP/dlambda - dQ/dx alone (the commutator-free condition).
  double derivative_only;
};
IntegrabilityResidual integrability_residual(double x, double lambda, int k, int n);

}  // namespace whgm
