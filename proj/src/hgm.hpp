#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "dop853_tableau.hpp"
#include "errors.hpp"
#include "hkn.hpp"
#include "pfaffian.hpp"
#include "scaled_real.hpp"

namespace whgm {

enum class RkMode { fixed, adaptive };
/// Embedded pair used in adaptive mode. The fehlberg78 error estimate vanishes
/// on components whose derivative depends on t only, so prefer dop853.
enum class RkScheme { dopri5, fehlberg78, dop853 };

struct RkOptions {
  RkMode mode = RkMode::adaptive;
  /// Step size in fixed mode; initial step hint in adaptive mode (0 = automatic).
  double step = 1e-4;
  double abs_tol = 1e-300;
  double rel_tol = 1e-14;
  /// Store a checkpoint every this much of the independent variable (0 = off).
  double checkpoint_stride = 0.0;
  long max_steps = 100000000;
  RkScheme scheme = RkScheme::dop853;

  void validate() const;
};

template <std::size_t N>
struct Checkpoint {
  double t;
  Vec<N> y;
  /// Natural-log offsets applied to the state, when the driver uses them.
  double log_scale = 0.0;
};

template <std::size_t N>
struct Trajectory {
  std::vector<Checkpoint<N>> points;
  long steps = 0;
  long rejected = 0;
};

template <std::size_t N>
using Rhs = std::function<Vec<N>(double, const Vec<N>&)>;

/// Hook run after every accepted step; may rescale the state in place.
/// The returned value is stored as the checkpoint log_scale.
template <std::size_t N>
using PostStep = std::function<double(double, Vec<N>&)>;

/// Thrown on integration failure; carries what was computed so far.
template <std::size_t N>
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, Trajectory<N> partial)
      : Error(ErrorCode::numerical, what), partial(std::move(partial)) {}
  Trajectory<N> partial;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

// Fehlberg 7(8): 13 stages, 8th-order solution, 7th-order error estimate.
struct Rkf78Tableau {
  std::array<std::array<double, 12>, 13> a{};
  std::array<double, 13> b{}, db{}, c{};

  Rkf78Tableau() {
    namespace ode = boost::numeric::odeint;
    auto row = [this](std::size_t i, const auto& coeffs) {
      for (std::size_t j = 0; j < coeffs.size(); ++j) a[i][j] = coeffs[j];
    };
    row(1, ode::rk78_coefficients_a1<double>());
    row(2, ode::rk78_coefficients_a2<double>());
    row(3, ode::rk78_coefficients_a3<double>());
    row(4, ode::rk78_coefficients_a4<double>());
    row(5, ode::rk78_coefficients_a5<double>());
    row(6, ode::rk78_coefficients_a6<double>());
    row(7, ode::rk78_coefficients_a7<double>());
    row(8, ode::rk78_coefficients_a8<double>());
    row(9, ode::rk78_coefficients_a9<double>());
    row(10, ode::rk78_coefficients_a10<double>());
    row(11, ode::rk78_coefficients_a11<double>());
    row(12, ode::rk78_coefficients_a12<double>());
    const ode::rk78_coefficients_b<double> bb;
    const ode::rk78_coefficients_db<double> dd;
    const ode::rk78_coefficients_c<double> cc;
    for (std::size_t i = 0; i < 13; ++i) {
      b[i] = bb[i];
      db[i] = dd[i];
      c[i] = cc[i];
    }
  }
};

inline const Rkf78Tableau& rkf78() {
  static const Rkf78Tableau t;
  return t;
}

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double h, std::initializer_list<std::pair<double, const Vec<N>*>> terms) {
  Vec<N> r = y;
  for (std::size_t i = 0; i < N; ++i) {
    double s = 0.0;
    for (const auto& [c, k] : terms) s += c * (*k)[i];
    r[i] += h * s;
  }
  return r;
}

// Kahan-compensated state update y += d.
template <std::size_t N>
void compensated_add(Vec<N>& y, Vec<N>& comp, const Vec<N>& d) {
  for (std::size_t i = 0; i < N; ++i) {
    const double dd = d[i] + comp[i];
    const double t = y[i] + dd;
    comp[i] = (y[i] - t) + dd;
    y[i] = t;
  }
}

template <std::size_t N>
bool all_finite(const Vec<N>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

/// Integrate y' = f(t, y) from (t0, y0) to target in either direction.
///
/// Checkpoints are stored at t0, at every value in outputs (landed exactly),
/// at the stride if requested, and at target.
template <std::size_t N>
Trajectory<N> rk_integrate(const Rhs<N>& f, double t0, Vec<N> y0, double target, const RkOptions& opts,
                           std::vector<double> outputs = {}, const PostStep<N>& post = {}) {
  opts.validate();
  Trajectory<N> tr;
  tr.points.push_back({t0, y0});
  if (target == t0) return tr;
  const double dir = target > t0 ? 1.0 : -1.0;
  std::sort(outputs.begin(), outputs.end(), [dir](double a, double b) { return dir * a < dir * b; });
  outputs.erase(std::remove_if(outputs.begin(), outputs.end(),
                               [&](double o) { return dir * (o - t0) <= 0.0 || dir * (o - target) >= 0.0; }),
                outputs.end());
  if (opts.checkpoint_stride > 0.0) {
    for (double s = t0 + dir * opts.checkpoint_stride; dir * (target - s) > 0.0; s += dir * opts.checkpoint_stride)
      outputs.push_back(s);
    std::sort(outputs.begin(), outputs.end(), [dir](double a, double b) { return dir * a < dir * b; });
    outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  }
  outputs.push_back(target);

  Vec<N> y = y0, comp{};
  double t = t0, t_comp = 0.0;
  double h = opts.mode == RkMode::fixed ? opts.step
             : opts.step > 0.0          ? opts.step
                                        : 1e-3 * std::max(std::fabs(target - t0), 1e-12);
  h = std::min(h, std::fabs(target - t0));
  double err_prev = 1e-4;
  const double order = opts.scheme == RkScheme::dopri5 ? 5.0 : 8.0;
  std::size_t next = 0;
  const double span = std::fabs(target - t0);

  while (next < outputs.size()) {
    if (tr.steps + tr.rejected >= opts.max_steps) {
      throw IntegrationError<N>("rk_integrate: step budget exhausted", std::move(tr));
    }
    const double stop = outputs[next];
    double hs = h;
    bool lands = false;
    if (dir * (t + dir * hs - stop) >= -1e-13 * std::max(span, std::fabs(stop))) {
      hs = std::fabs(stop - t);
      lands = true;
    }
    const double hh = dir * hs;
    Vec<N> d{};
    double err = 0.0;
    if (opts.mode == RkMode::fixed) {
      const Vec<N> k1 = f(t, y);
      const Vec<N> k2 = f(t + 0.5 * hh, detail::axpy<N>(y, hh, {{0.5, &k1}}));
      const Vec<N> k3 = f(t + 0.5 * hh, detail::axpy<N>(y, hh, {{0.5, &k2}}));
      const Vec<N> k4 = f(t + hh, detail::axpy<N>(y, hh, {{1.0, &k3}}));
      for (std::size_t i = 0; i < N; ++i) d[i] = hh * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    } else if (opts.scheme == RkScheme::dop853) {
      using T = detail::Dop853Tableau;
      std::array<Vec<N>, 13> k;
      k[0] = f(t, y);
      for (int st = 1; st < T::stages; ++st) {
        Vec<N> ys = y;
        for (std::size_t i = 0; i < N; ++i) {
          double acc = 0.0;
          for (int j = 0; j < st; ++j) acc += T::a[st][j] * k[j][i];
          ys[i] += hh * acc;
        }
        k[st] = f(t + T::c[st] * hh, ys);
      }
      Vec<N> yn = y;
      for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        for (int j = 0; j < T::stages; ++j) acc += T::b[j] * k[j][i];
        d[i] = hh * acc;
        yn[i] += d[i];
      }
      k[12] = f(t + hh, yn);
      double e5 = 0.0, e3 = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        double a5 = 0.0, a3 = 0.0;
        for (int j = 0; j < 13; ++j) {
          a5 += T::e5[j] * k[j][i];
          a3 += T::e3[j] * k[j][i];
        }
        const double sc = opts.abs_tol + opts.rel_tol * std::max(std::fabs(y[i]), std::fabs(yn[i]));
        e5 = std::max(e5, std::fabs(a5) / sc);
        e3 = std::max(e3, std::fabs(a3) / sc);
      }
      const double den = e5 * e5 + 0.01 * e3 * e3;
      err = den > 0.0 ? std::fabs(hh) * e5 * e5 / std::sqrt(den) : 0.0;
    } else if (opts.scheme == RkScheme::fehlberg78) {
      const auto& tb = detail::rkf78();
      std::array<Vec<N>, 13> k;
      k[0] = f(t, y);
      for (std::size_t st = 1; st < 13; ++st) {
        Vec<N> ys = y;
        for (std::size_t i = 0; i < N; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < st; ++j) acc += tb.a[st][j] * k[j][i];
          ys[i] += hh * acc;
        }
        k[st] = f(t + tb.c[st] * hh, ys);
      }
      for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0, ea = 0.0;
        for (std::size_t j = 0; j < 13; ++j) {
          acc += tb.b[j] * k[j][i];
          ea += tb.db[j] * k[j][i];
        }
        d[i] = hh * acc;
        const double sc = opts.abs_tol + opts.rel_tol * std::max(std::fabs(y[i]), std::fabs(y[i] + d[i]));
        err = std::max(err, std::fabs(hh * ea) / sc);
      }
    } else {
      using namespace detail;
      const Vec<N> k1 = f(t, y);
      const Vec<N> k2 = f(t + c2 * hh, axpy<N>(y, hh, {{a21, &k1}}));
      const Vec<N> k3 = f(t + c3 * hh, axpy<N>(y, hh, {{a31, &k1}, {a32, &k2}}));
      const Vec<N> k4 = f(t + c4 * hh, axpy<N>(y, hh, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      const Vec<N> k5 = f(t + c5 * hh, axpy<N>(y, hh, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      const Vec<N> k6 = f(t + hh, axpy<N>(y, hh, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      for (std::size_t i = 0; i < N; ++i)
        d[i] = hh * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      Vec<N> y5 = y;
      for (std::size_t i = 0; i < N; ++i) y5[i] += d[i];
      const Vec<N> k7 = f(t + hh, y5);
      for (std::size_t i = 0; i < N; ++i) {
        const double ei =
            hh * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = opts.abs_tol + opts.rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
        err = std::max(err, std::fabs(ei) / sc);
      }
    }
    if (opts.mode == RkMode::adaptive) {
      if (!std::isfinite(err)) err = 1e10;
      if (err > 1.0) {
        ++tr.rejected;
        h = hs * std::max(0.1, 0.9 * std::pow(err, -1.0 / order));
        if (h < 1e-15 * std::max(1.0, std::fabs(t))) {
          throw IntegrationError<N>("rk_integrate: step size underflow", std::move(tr));
        }
        continue;
      }
    }
    detail::compensated_add(y, comp, d);
    if (!detail::all_finite(y)) {
      throw IntegrationError<N>("rk_integrate: state became non-finite", std::move(tr));
    }
    if (lands) {
      t = stop;
      t_comp = 0.0;
    } else {
      const double dt = hh + t_comp;
      const double tn = t + dt;
      t_comp = (t - tn) + dt;
      t = tn;
    }
    ++tr.steps;
    double tag = 0.0;
    if (post) {
      const Vec<N> before = y;
      tag = post(t, y);
      if (before != y) comp = Vec<N>{};
    }
    if (lands) {
      tr.points.push_back({t, y, tag});
      ++next;
    }
    if (opts.mode == RkMode::adaptive) {
      const double e = std::max(err, 1e-10);
      double fac = 0.9 * std::pow(e, -0.7 / order) * std::pow(err_prev, 0.4 / order);
      fac = std::clamp(fac, 0.2, 5.0);
      if (!lands || hs >= h) h = hs * fac;
      err_prev = e;
    }
  }
  return tr;
}

/// Linear system convenience overload: y' = A(t) y.
template <std::size_t N>
Trajectory<N> rk_integrate(const OdeSystem<N>& sys, double t0, const Vec<N>& y0, double target,
                           const RkOptions& opts, std::vector<double> outputs = {}) {
  Rhs<N> f = [&sys](double t, const Vec<N>& y) { return sys.matrix(t) * y; };
  return rk_integrate<N>(f, t0, y0, target, opts, std::move(outputs));
}

enum class Provenance { series, quadrature };
const char* to_string(Provenance p);

/// State [H, v, theta_phi v] at phi = sqrt(x0); H kept scaled.
struct InitialCondition {
  double x0 = 0.0;
  double phi0 = 0.0;
  ScaledReal H;
  double v = 0.0;
  double theta_v = 0.0;
  Provenance provenance = Provenance::series;
  /// Relative error estimate of H.
  double rel_err = 0.0;
  /// Absolute error estimate of H where representable.
  double est_abs_error() const { return rel_err * std::fabs(H.to_double()); }
  Vec<3> state() const { return {H.to_double(), v, theta_v}; }
};

enum class IcMethod { series, quadrature };

InitialCondition make_ic(int k, int n, double lambda, double x0, IcMethod method,
                         const SeriesControl& ctl = {}, const QuadOptions& qopts = {});

struct EvalResult {
  ScaledReal value;
  double rel_err = 0.0;
  std::string method;
  long steps = 0;
  int terms = 0;
  double wall_ms = 0.0;
  /// Relative deviation from a quadrature reference, when one was computed.
  std::optional<double> deviation;
};

struct HgmLambdaOptions {
  RkOptions rk{RkMode::fixed, 1e-4};
  SeriesControl ctl{};
  bool compare_quadrature = false;
};

/// theta_lambda^j H for j = 0..3, integrated in lambda along the 4-D system.
EvalResult hgm_lambda(int k, int n, double x, double lambda0, double lambda, const HgmLambdaOptions& opts = {});
/// Same, returning every checkpoint [H, theta H, theta^2 H, theta^3 H] at the requested lambdas.
std::vector<Vec<4>> hgm_lambda_path(int k, int n, double x, double lambda0, const std::vector<double>& lambdas,
                                    const HgmLambdaOptions& opts = {});

/// 4-D x-direction integration from a series initial condition at x0.
EvalResult hgm_x4(int k, int n, double lambda, double x0, double x, const RkOptions& rk = {},
                  const SeriesControl& ctl = {});

struct HgmXOptions {
  RkOptions rk{};
  SeriesControl ctl{};
};

/// Plain 3-D phi-direction HGM from a series initial condition at x0.
EvalResult hgm_x(int k, int n, double lambda, double x0, double x, const HgmXOptions& opts = {});
/// One trajectory, H reported at every x in xs (ascending, all >= ic.x0).
std::vector<EvalResult> hgm_x_grid(int k, int n, double lambda, const InitialCondition& ic,
                                   const std::vector<double>& xs, const RkOptions& rk = {});
/// The full trajectory of [H, v, theta_phi v] in phi, for diagnostics.
Trajectory<3> hgm_x_trajectory(int k, int n, double lambda, const InitialCondition& ic, double x,
                               const RkOptions& rk = {});

/// Gauge-switching HGM with log offsets; H returned on offset e^{lambda}.
EvalResult hgm_x_enhanced(int k, int n, double lambda, const InitialCondition& ic, double x,
                          const RkOptions& rk = {});
std::vector<EvalResult> hgm_x_enhanced_grid(int k, int n, double lambda, const InitialCondition& ic,
                                            const std::vector<double>& xs, const RkOptions& rk = {});

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace whgm
