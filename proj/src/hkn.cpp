#include "hkn.hpp"

#include <cmath>
#include <algorithm>
#include <cstring>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

namespace whgm {

namespace {

constexpr double kEpsMachine = 2.220446049250313e-16;
constexpr int kStallRun = 20;

void check_args(const HknParams& p, double x, double lambda, const char* who) {
  p.validate();
  require(std::isfinite(x) && x >= 0.0, ErrorCode::domain, std::string(who) + ": x must be finite and >= 0");
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::domain,
          std::string(who) + ": lambda must be finite and >= 0");
}

double factorial_d(int i) {
  double r = 1.0;
  for (int j = 2; j <= i; ++j) r *= j;
  return r;
}

// Series shell term (-1)^q x^{p+q} lambda^p / ((n)_p p! q! (k+1+p+q)/(k+1)),
// evaluated the way a plain double implementation would.
double series_term(int k, int n, double x, double lambda, int pp, int q) {
  const double num = std::pow(x, pp + q) * std::pow(lambda, pp);
  const double den = pochhammer(n, pp) * factorial_d(pp) * factorial_d(q) * ((k + 1.0 + pp + q) / (k + 1.0));
  const double t = num / den;
  return (q % 2 == 0) ? t : -t;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

double bessel_scaled(int nu, double y) {
  gsl_sf_result r;
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  const int st = gsl_sf_bessel_In_scaled_e(nu, y, &r);
  gsl_set_error_handler(old);
  if (st != GSL_SUCCESS) throw Error(ErrorCode::numerical, "bessel In_scaled failed");
  return r.val;
}

// 0F1 by its series without convergence bookkeeping; for moderate z only.
double of1_quick(int n, double z) {
  double s = 1.0, t = 1.0;
  for (int i = 1; i < 100000; ++i) {
    t *= z / ((n + i - 1.0) * i);
    s += t;
    if (t <= 1e-17 * s && z < (n + i) * (i + 1.0)) break;
  }
  return s;
}

constexpr double kBesselSwitch = 50.0;
constexpr double kNativeZ = 1e4;

// Log-domain integrand split as g(y) = log[y^k e^{-y} 0F1(lambda y)] - lambda
//   = k log y - (sqrt y - sqrt lambda)^2 + r(y),  r(y) = log 0F1(lambda y) - 2 sqrt(lambda y).
struct LogIntegrand {
  int k, n;
  double lambda, sl;

  double r_series(double y) const {
    const double z = lambda * y;
    return std::log(of1_quick(n, z)) - 2.0 * std::sqrt(z);
  }
  bool bessel(double y) const { return lambda * y > kBesselSwitch; }
  double log_is(double y) const { return std::log(bessel_scaled(n - 1, 2.0 * std::sqrt(lambda * y))); }
  double r(double y) const {
    if (!bessel(y)) return r_series(y);
    return std::lgamma(static_cast<double>(n)) - 0.5 * (n - 1) * std::log(lambda * y) + log_is(y);
  }
  double sq(double y) const {
    const double d = std::sqrt(y) - sl;
    return d * d;
  }
  double g(double y) const {
    if (y <= 0.0) return k == 0 ? -lambda : -std::numeric_limits<double>::infinity();
    return (k == 0 ? 0.0 : k * std::log(y)) - sq(y) + r(y);
  }
  // g(y) - g(yr), arranged to avoid cancellation between large terms.
  double g_rel(double y, double yr, double r_yr, double log_is_yr) const {
    if (y <= 0.0) return k == 0 ? g(0.0) - g(yr) : -std::numeric_limits<double>::infinity();
    const double sy = std::sqrt(y), syr = std::sqrt(yr);
    const double ds = (y - yr) / (sy + syr);
    const double lr = std::log1p((y - yr) / yr);
    double v = (k == 0 ? 0.0 : k * lr) - ds * (sy + syr - 2.0 * sl);
    if (bessel(y) && bessel(yr)) {
      v += -0.5 * (n - 1) * lr + (log_is(y) - log_is_yr);
    } else {
      v += r(y) - r_yr;
    }
    return v;
  }
};

double golden_max(const LogIntegrand& f, double a, double b) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f.g(c), fd = f.g(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * (1.0 + std::fabs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f.g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f.g(d);
    }
  }
  return 0.5 * (a + b);
}

// Distance from the mode at which the log-integrand has dropped by one unit.
template <class G>
double drop_width(G&& grel, double y_star, double limit) {
  double w = 1e-6 * std::max(1.0, y_star);
  while (w < limit) {
    if (grel(w) < -1.0) return w;
    w *= 2.0;
  }
  return limit;
}

template <class G>
std::vector<double> panel_breaks(G&& grel, double y_star, double x) {
  std::vector<double> pts{0.0, x};
  if (y_star > 0.0 && y_star < x) pts.push_back(y_star);
  if (y_star > 0.0) {
    const double wl = drop_width([&](double w) { return grel(y_star - w); }, y_star, y_star);
    for (double m : {1.0, 4.0, 12.0, 40.0})
      if (y_star - m * wl > 0.0) pts.push_back(y_star - m * wl);
  }
  if (y_star < x) {
    const double wr = drop_width([&](double w) { return grel(y_star + w); }, y_star, x - y_star);
    for (double m : {1.0, 4.0, 12.0, 40.0})
      if (y_star + m * wr < x) pts.push_back(y_star + m * wr);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

struct Panel {
  double a, b, value, err;
};

template <class F>
Panel gk31(F& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  using G = boost::math::quadrature::gauss<double, 15>;
  static const auto& xk = GK::abscissa();
  static const auto& wk = GK::weights();
  static const auto& wg = G::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double f0 = f(c);
  double rk = f0 * wk[0], rg = f0 * wg[0], asc = 0.0;
  std::array<double, 31> fv{};
  fv[0] = f0;
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double fp = f(c + h * xk[i]), fm = f(c - h * xk[i]);
    fv[2 * i - 1] = fp;
    fv[2 * i] = fm;
    rk += (fp + fm) * wk[i];
    if (i % 2 == 0) rg += (fp + fm) * wg[i / 2];
  }
  const double mean = 0.5 * rk;
  asc = std::fabs(f0 - mean) * wk[0];
  for (std::size_t i = 1; i < xk.size(); ++i) {
    asc += (std::fabs(fv[2 * i - 1] - mean) + std::fabs(fv[2 * i] - mean)) * wk[i];
  }
  double err = std::fabs((rk - rg) * h);
  asc *= std::fabs(h);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  const double floor = 4.0 * kEpsMachine * std::fabs(rk * h);
  return {a, b, rk * h, std::max(err, floor)};
}

template <class F>
double integrate_panels(F&& f, const std::vector<double>& pts, const QuadOptions& o, double* err_out,
                        int* evals) {
  int count = 0;
  auto counted = [&](double y) {
    ++count;
    return f(y);
  };
  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) panels.push_back(gk31(counted, pts[i], pts[i + 1]));
  const int budget = 1 << o.max_depth;
  auto by_err = [](const Panel& l, const Panel& r) { return l.err < r.err; };
  std::make_heap(panels.begin(), panels.end(), by_err);
  for (;;) {
    double total = 0.0, err = 0.0;
    for (const auto& pn : panels) {
      total += pn.value;
      err += pn.err;
    }
    if (err <= o.tol * std::fabs(total) || static_cast<int>(panels.size()) >= budget) {
      *err_out = err;
      *evals = count;
      return total;
    }
    std::pop_heap(panels.begin(), panels.end(), by_err);
    const Panel worst = panels.back();
    panels.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      *err_out = err;
      *evals = count;
      return total;
    }
    panels.push_back(gk31(counted, worst.a, mid));
    std::push_heap(panels.begin(), panels.end(), by_err);
    panels.push_back(gk31(counted, mid, worst.b));
    std::push_heap(panels.begin(), panels.end(), by_err);
  }
}

}  // namespace

void HknParams::validate() const {
  require(k >= 0, ErrorCode::invalid_argument, "k must be >= 0");
  require(n >= 1, ErrorCode::invalid_argument, "n must be >= 1");
}

const char* to_string(Breakdown b) {
  switch (b) {
    case Breakdown::none: return "none";
    case Breakdown::stall: return "stall";
    case Breakdown::max_terms: return "max_terms";
    case Breakdown::non_finite: return "non_finite";
    case Breakdown::quadrature_budget: return "quadrature_budget";
  }
  return "unknown";
}

HknResult hkn_series(const HknParams& p, double x, double lambda, const SeriesControl& ctl) {
  check_args(p, x, lambda, "hkn_series");
  ctl.validate();
  HknResult res;
  if (x == 0.0) {
    res.converged = true;
    return res;
  }
  const double pref = std::pow(x, p.k + 1) / (p.k + 1.0);
  double sum = 0.0, abs_sum = 0.0;
  double prev = 0.0;
  int same = 0;
  for (int N = 0; N <= ctl.max_terms; ++N) {
    for (int pp = 0; pp <= N; ++pp) {
      const double t = series_term(p.k, p.n, x, lambda, pp, N);
      sum += t;
      abs_sum += std::fabs(t);
    }
    for (int q = 0; q < N; ++q) {
      const double t = series_term(p.k, p.n, x, lambda, N, q);
      sum += t;
      abs_sum += std::fabs(t);
    }
    const double h = pref * sum;
    if (N > 0) {
      if (std::fabs(h - prev) < ctl.eps * std::fabs(prev)) {
        res.value = ScaledReal::from_double(h);
        res.work = N;
        res.converged = true;
        const double cancel = abs_sum > 0.0 && sum != 0.0 ? kEpsMachine * abs_sum / std::fabs(sum) : 0.0;
        res.rel_err = std::max(std::fabs(h - prev) / std::fabs(h), cancel);
        return res;
      }
      same = bit_equal(h, prev) ? same + 1 : 0;
      if (same >= kStallRun) {
        res.value = ScaledReal::from_double(h);
        res.work = N;
        res.breakdown = Breakdown::stall;
        res.rel_err = std::numeric_limits<double>::infinity();
        return res;
      }
    }
    prev = h;
  }
  res.value = ScaledReal::from_double(prev);
  res.work = ctl.max_terms;
  res.breakdown = Breakdown::max_terms;
  res.rel_err = std::numeric_limits<double>::infinity();
  return res;
}

std::array<double, 4> hkn_series_theta_lambda(const HknParams& p, double x, double lambda,
                                              const SeriesControl& ctl) {
  check_args(p, x, lambda, "hkn_series_theta_lambda");
  ctl.validate();
  std::array<double, 4> out{};
  if (x == 0.0) return out;
  const double pref = std::pow(x, p.k + 1) / (p.k + 1.0);
  std::array<double, 4> sum{}, prev{};
  auto add = [&](int pp, int q) {
    const double t = series_term(p.k, p.n, x, lambda, pp, q);
    double w = 1.0;
    for (int j = 0; j < 4; ++j) {
      sum[j] += w * t;
      w *= pp;
    }
  };
  for (int N = 0; N <= ctl.max_terms; ++N) {
    for (int pp = 0; pp <= N; ++pp) add(pp, N);
    for (int q = 0; q < N; ++q) add(N, q);
    bool done = N > 0;
    for (int j = 0; j < 4; ++j) {
      const double h = pref * sum[j];
      if (!std::isfinite(h)) throw Error(ErrorCode::not_converged, "hkn_series_theta_lambda: non-finite partial sum");
      if (!(std::fabs(h - prev[j]) <= ctl.eps * std::fabs(h))) done = false;
      prev[j] = h;
    }
    if (done) return prev;
  }
  throw Error(ErrorCode::not_converged, "hkn_series_theta_lambda: max_terms reached");
}

bool hkn_quadrature_native(const HknParams& p, double x, double lambda) {
  if (x <= 0.0) return true;
  if (lambda * x > kNativeZ) return false;
  const LogIntegrand f{p.k, p.n, lambda, std::sqrt(lambda)};
  const double y_star = golden_max(f, 0.0, x);
  const double peak = lambda + f.g(std::max(y_star, 1e-300));
  return peak < 600.0 && peak + std::log(x) > -600.0;
}

HknResult hkn_quadrature(const HknParams& p, double x, double lambda, const QuadOptions& opts) {
  check_args(p, x, lambda, "hkn_quadrature");
  require(opts.tol > 0.0, ErrorCode::invalid_argument, "hkn_quadrature: tol must be > 0");
  HknResult res;
  if (x == 0.0) {
    res.converged = true;
    return res;
  }
  const LogIntegrand f{p.k, p.n, lambda, std::sqrt(lambda)};
  double y_star = golden_max(f, 0.0, x);
  if (p.k > 0) y_star = std::max(y_star, 1e-300);
  const bool native = opts.mode == QuadMode::native ||
                      (opts.mode == QuadMode::automatic && hkn_quadrature_native(p, x, lambda));
  const double yr = y_star > 0.0 ? y_star : std::min(x, 1.0);
  const double r_yr = f.r(yr);
  const double lis_yr = f.bessel(yr) ? f.log_is(yr) : 0.0;
  auto grel = [&](double y) { return f.g_rel(y, yr, r_yr, lis_yr); };
  const auto pts = panel_breaks(grel, y_star, x);
  double err = 0.0, integral = 0.0;
  int evals = 0;
  if (native) {
    auto integrand = [&](double y) {
      return std::pow(y, p.k) * std::exp(-y) * of1_quick(p.n, lambda * y);
    };
    integral = integrate_panels(integrand, pts, opts, &err, &evals);
    res.value = ScaledReal::from_double(integral);
  } else {
    auto integrand = [&](double y) { return std::exp(grel(y)); };
    integral = integrate_panels(integrand, pts, opts, &err, &evals);
    const double g_ref = (p.k == 0 ? 0.0 : p.k * std::log(yr)) - f.sq(yr) + r_yr;
    if (std::fabs(g_ref) < 600.0) {
      res.value = ScaledReal{integral * std::exp(g_ref), lambda};
    } else {
      res.value = ScaledReal{integral, lambda + g_ref}.normalized();
    }
  }
  res.work = evals;
  const double rel = integral != 0.0 ? err / std::fabs(integral) : 0.0;
  res.rel_err = std::max(rel, 4.0 * kEpsMachine);
  res.converged = std::isfinite(integral) && rel <= std::max(opts.tol, 64.0 * kEpsMachine) * 10.0;
  if (!res.converged) res.breakdown = std::isfinite(integral) ? Breakdown::quadrature_budget : Breakdown::non_finite;
  return res;
}

ScaledReal hkn_saddle_limit(const HknParams& p, double lambda) {
  p.validate();
  require(lambda > 0.0, ErrorCode::domain, "hkn_saddle_limit: lambda must be > 0");
  const double a = 1.0 + 2.0 * p.k - p.n + 0.5;
  require(lambda + 2.0 * a > 0.0, ErrorCode::domain, "hkn_saddle_limit: requires lambda + 2(1+2k-n+1/2) > 0");
  const double sl = std::sqrt(lambda);
  const double s0 = 0.5 * (sl + std::sqrt(lambda + 2.0 * a));
  const double P = (s0 - sl) * (s0 - sl) - a * std::log(s0);
  const double P2 = 2.0 + a / (s0 * s0);
  const double log_mag = std::log(2.0) + std::lgamma(2.0 * p.n - 1.0) - std::lgamma(p.n - 0.5) +
                         (0.5 - p.n) * std::log(4.0 * sl) - P + 0.5 * std::log(2.0 * std::numbers::pi / P2);
  const double m = std::exp(log_mag);
  if (std::isfinite(m) && m > 0.0) return ScaledReal{m, lambda};
  return ScaledReal{1.0, lambda + log_mag};
}

double hkn_dx(const HknParams& p, double x, double lambda) {
  check_args(p, x, lambda, "hkn_dx");
  return std::pow(x, p.k) * std::exp(-x) * of1(p.n, x * lambda).value;
}

}  // namespace whgm
