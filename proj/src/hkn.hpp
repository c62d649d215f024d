#pragma once

#include <array>
#include <string>

#include "scaled_real.hpp"
#include "specfun.hpp"

namespace whgm {

/// Index pair of H^k_n: k = t - i, n = t - s + 1.
struct HknParams {
  int k = 0;
  int n = 1;

  void validate() const;
};

enum class Breakdown { none, stall, max_terms, non_finite, quadrature_budget };

const char* to_string(Breakdown b);

struct HknResult {
  ScaledReal value;
  /// Relative error estimate of value.
  double rel_err = 0.0;
  /// Series: number of shells N used. Quadrature: integrand evaluations.
  int work = 0;
  bool converged = false;
  Breakdown breakdown = Breakdown::none;

  double abs_err_estimate() const { return rel_err * std::fabs(value.to_double()); }
};

/// Double-precision truncation of the double series for H^k_n.
///
/// Stops at the first N with |H_{N+1} - H_N| < eps |H_N| and returns
/// H_{N+1}. Twenty consecutive bit-identical partial sums without meeting
/// eps are reported as a stall.
HknResult hkn_series(const HknParams& p, double x, double lambda, const SeriesControl& ctl = {});

/// theta_lambda^j H^k_n for j = 0..3 by term-wise differentiation.
std::array<double, 4> hkn_series_theta_lambda(const HknParams& p, double x, double lambda,
                                              const SeriesControl& ctl = {});

enum class QuadMode { automatic, native, log };

struct QuadOptions {
  double tol = 1e-14;
  QuadMode mode = QuadMode::automatic;
  /// Subdivision budget is 2^max_depth panels.
  int max_depth = 12;
};

/// Adaptive Gauss-Kronrod integration of y^k e^{-y} 0F1(;n;lambda y) over [0, x].
///
/// In log mode the result is returned on offset e^{lambda} (value.expo == lambda
/// whenever the significand fits), so entries sharing lambda share an offset.
HknResult hkn_quadrature(const HknParams& p, double x, double lambda, const QuadOptions& opts = {});
inline HknResult hkn_quadrature(const HknParams& p, double x, double lambda, double tol) {
  QuadOptions o;
  o.tol = tol;
  return hkn_quadrature(p, x, lambda, o);
}

/// Whether automatic quadrature would evaluate the integrand natively.
bool hkn_quadrature_native(const HknParams& p, double x, double lambda);

/// Large-x limit of H^k_n(x, lambda) from the saddle-point approximation.
ScaledReal hkn_saddle_limit(const HknParams& p, double lambda);

/// dH/dx = x^k e^{-x} 0F1(;n;x lambda).
double hkn_dx(const HknParams& p, double x, double lambda);

}  // namespace whgm
