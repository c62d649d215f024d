#include "hgm.hpp"

#include <cmath>
#include <numbers>

namespace whgm {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_kn(int k, int n) { HknParams{k, n}.validate(); }

double rk_rel_err(const RkOptions& rk) {
  return rk.mode == RkMode::adaptive ? 10.0 * rk.rel_tol : std::pow(rk.step, 4);
}

Rhs<3> plain_rhs(int k, int n, double psi) {
  return [=](double phi, const Vec<3>& g) {
    const ScaledMat3 a = build_A3_phi_scaled(phi, psi, k, n);
    return Vec<3>{std::exp(a.log_a12) * g[1], a.m[1][2] * g[2], a.m[2][1] * g[1] + a.m[2][2] * g[2]};
  };
}

// Enhanced state h = [h1, h2, h3] with
//   H = h1 2^{e1} e^{lambda - d(phi)},  v = h2 2^{e2},  theta_phi v = h3 2^{e2},
// where d(phi) = (phi - psi)^2 + (lambda - psi^2) below psi (G2) and 0 above (G3).
struct Enhanced {
  int k, n;
  double lambda, psi;
  int e1 = 0, e2 = 0;

  double d(double phi, bool g3) const {
    if (g3) return 0.0;
    const double u = phi - psi;
    return u * u + (lambda - psi * psi);
  }

  Vec<3> rhs(double phi, const Vec<3>& h, bool g3) const {
    double ge = 0.0, drift = 0.0;
    if (g3) {
      const double u = phi - psi;
      ge = -u * u + (psi * psi - lambda);
    } else {
      drift = 2.0 * phi - 2.0 * psi;
    }
    const double a = std::exp(kLn2 + (2.0 * k + 1.0) * std::log(phi) + ge + (e2 - e1) * kLn2);
    const double pp = phi * psi;
    return {drift * h[0] + a * h[1], h[2] / phi,
            -2.0 * (2.0 * n - 1.0) * psi * h[1] - (4.0 * pp + 2.0 * (n - 1.0)) / phi * h[2]};
  }

  double renormalize(Vec<3>& h) {
    constexpr double hi = 0x1p100, lo = 0x1p-100;
    const double a1 = std::fabs(h[0]);
    if (a1 != 0.0 && (a1 > hi || a1 < lo)) {
      const int e = std::ilogb(h[0]);
      h[0] = std::ldexp(h[0], -e);
      e1 += e;
    }
    const double a2 = std::max(std::fabs(h[1]), std::fabs(h[2]));
    if (a2 != 0.0 && (a2 > hi || a2 < lo)) {
      const int e = std::ilogb(a2);
      h[1] = std::ldexp(h[1], -e);
      h[2] = std::ldexp(h[2], -e);
      e2 += e;
    }
    return static_cast<double>(e1);
  }

  ScaledReal H(double h1, int e1_at, double phi, bool g3) const {
    const double dd = d(phi, g3);
    const double m = std::ldexp(h1, e1_at) * std::exp(-dd);
    if (std::isfinite(m) && (m != 0.0 || h1 == 0.0) && std::fabs(m) > 1e-290) return ScaledReal{m, lambda};
    return ScaledReal{h1, lambda - dd + e1_at * kLn2}.normalized();
  }
};

}  // namespace

void RkOptions::validate() const {
  require(step > 0.0 || (mode == RkMode::adaptive && step == 0.0), ErrorCode::invalid_argument,
          "rk: step must be > 0");
  require(abs_tol > 0.0 && rel_tol > 0.0, ErrorCode::invalid_argument, "rk: tolerances must be > 0");
  require(checkpoint_stride >= 0.0, ErrorCode::invalid_argument, "rk: checkpoint stride must be >= 0");
  require(max_steps > 0, ErrorCode::invalid_argument, "rk: max_steps must be > 0");
}

const char* to_string(Provenance p) { return p == Provenance::series ? "series" : "quadrature"; }

InitialCondition make_ic(int k, int n, double lambda, double x0, IcMethod method, const SeriesControl& ctl,
                         const QuadOptions& qopts) {
  check_kn(k, n);
  require(x0 > 0.0 && std::isfinite(x0), ErrorCode::singular_point, "make_ic: x0 must be > 0");
  require(lambda >= 0.0 && std::isfinite(lambda), ErrorCode::domain, "make_ic: lambda must be >= 0");
  InitialCondition ic;
  ic.x0 = x0;
  ic.phi0 = std::sqrt(x0);
  const HknParams p{k, n};
  HknResult h;
  if (method == IcMethod::series) {
    h = hkn_series(p, x0, lambda, ctl);
    ic.provenance = Provenance::series;
    if (!h.converged) {
      throw Error(ErrorCode::not_converged,
                  std::string("make_ic: series initial condition did not converge (") + to_string(h.breakdown) + ")");
    }
  } else {
    h = hkn_quadrature(p, x0, lambda, qopts);
    ic.provenance = Provenance::quadrature;
    if (!h.converged) throw Error(ErrorCode::not_converged, "make_ic: quadrature initial condition did not converge");
  }
  ic.H = h.value;
  ic.rel_err = h.rel_err;
  const double psi = std::sqrt(lambda);
  const double y = 2.0 * ic.phi0 * psi;
  ic.v = of1_exp_scaled(n, y);
  ic.theta_v = ic.v * (2.0 * of1_theta_ratio(n, x0 * lambda) - y);
  return ic;
}

EvalResult hgm_lambda(int k, int n, double x, double lambda0, double lambda, const HgmLambdaOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto path = hgm_lambda_path(k, n, x, lambda0, {lambda}, opts);
  EvalResult r;
  r.value = ScaledReal::from_double(path.back()[0]);
  r.method = "hgm-lambda";
  r.rel_err = rk_rel_err(opts.rk);
  r.steps = opts.rk.mode == RkMode::fixed ? static_cast<long>(std::ceil(std::fabs(lambda - lambda0) / opts.rk.step)) : 0;
  if (opts.compare_quadrature) {
    const auto q = hkn_quadrature(HknParams{k, n}, x, lambda);
    const double qv = q.value.to_double();
    r.deviation = std::fabs(path.back()[0] - qv) / std::fabs(qv);
  }
  r.wall_ms = elapsed_ms(t0);
  return r;
}

std::vector<Vec<4>> hgm_lambda_path(int k, int n, double x, double lambda0, const std::vector<double>& lambdas,
                                    const HgmLambdaOptions& opts) {
  check_kn(k, n);
  require(x > 0.0, ErrorCode::singular_point, "hgm_lambda: x must be > 0");
  require(lambda0 > 0.0, ErrorCode::singular_point, "hgm_lambda: lambda0 must be > 0");
  require(!lambdas.empty(), ErrorCode::invalid_argument, "hgm_lambda: no target lambda");
  for (double l : lambdas) require(l > 0.0, ErrorCode::singular_point, "hgm_lambda: lambda must be > 0");
  const auto f0 = hkn_series_theta_lambda(HknParams{k, n}, x, lambda0, opts.ctl);
  const Vec<4> y0{f0[0], f0[1], f0[2], f0[3]};
  const double target = *std::max_element(lambdas.begin(), lambdas.end());
  std::vector<Vec<4>> out;
  if (target == lambda0) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) out.push_back(y0);
    return out;
  }
  Rhs<4> f = [x, k, n](double l, const Vec<4>& y) { return build_Q4(x, l, k, n) * y; };
  const auto tr = rk_integrate<4>(f, lambda0, y0, target, opts.rk, lambdas);
  for (double l : lambdas) {
    const auto it = std::find_if(tr.points.begin(), tr.points.end(), [l](const auto& c) { return c.t == l; });
    require(it != tr.points.end(), ErrorCode::numerical, "hgm_lambda: missing checkpoint");
    out.push_back(it->y);
  }
  return out;
}

EvalResult hgm_x4(int k, int n, double lambda, double x0, double x, const RkOptions& rk, const SeriesControl& ctl) {
  check_kn(k, n);
  require(x0 > 0.0 && x > 0.0, ErrorCode::singular_point, "hgm_x4: x0 and x must be > 0");
  require(lambda > 0.0, ErrorCode::singular_point, "hgm_x4: lambda must be > 0");
  const auto t0 = std::chrono::steady_clock::now();
  const auto f0 = hkn_series_theta_lambda(HknParams{k, n}, x0, lambda, ctl);
  Rhs<4> f = [lambda, k, n](double xx, const Vec<4>& y) { return build_P4(xx, lambda, k, n) * y; };
  const auto tr = rk_integrate<4>(f, x0, Vec<4>{f0[0], f0[1], f0[2], f0[3]}, x, rk);
  EvalResult r;
  r.value = ScaledReal::from_double(tr.points.back().y[0]);
  r.method = "hgm-x4";
  r.steps = tr.steps;
  r.rel_err = rk_rel_err(rk);
  r.wall_ms = elapsed_ms(t0);
  return r;
}

Trajectory<3> hgm_x_trajectory(int k, int n, double lambda, const InitialCondition& ic, double x,
                               const RkOptions& rk) {
  check_kn(k, n);
  require(x > 0.0, ErrorCode::singular_point, "hgm_x: x must be > 0");
  require(ic.H.representable(), ErrorCode::numerical,
          "hgm_x: initial condition outside double range; use the enhanced method");
  return rk_integrate<3>(plain_rhs(k, n, std::sqrt(lambda)), ic.phi0, ic.state(), std::sqrt(x), rk);
}

std::vector<EvalResult> hgm_x_grid(int k, int n, double lambda, const InitialCondition& ic,
                                   const std::vector<double>& xs, const RkOptions& rk) {
  check_kn(k, n);
  require(!xs.empty(), ErrorCode::invalid_argument, "hgm_x: empty grid");
  require(ic.H.representable(), ErrorCode::numerical,
          "hgm_x: initial condition outside double range; use the enhanced method");
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> phis;
  for (double x : xs) {
    require(x > 0.0, ErrorCode::singular_point, "hgm_x: x must be > 0");
    require(x >= ic.x0, ErrorCode::invalid_argument, "hgm_x: grid point below the initial condition");
    phis.push_back(std::sqrt(x));
  }
  const double target = *std::max_element(phis.begin(), phis.end());
  const auto tr = rk_integrate<3>(plain_rhs(k, n, std::sqrt(lambda)), ic.phi0, ic.state(), target, rk, phis);
  const double ms = elapsed_ms(t0);
  std::vector<EvalResult> out;
  for (double ph : phis) {
    const auto it = std::find_if(tr.points.begin(), tr.points.end(), [ph](const auto& c) { return c.t == ph; });
    require(it != tr.points.end(), ErrorCode::numerical, "hgm_x: missing checkpoint");
    EvalResult r;
    r.value = ScaledReal::from_double(it->y[0]);
    r.method = "hgm";
    r.steps = tr.steps;
    r.rel_err = ic.rel_err + rk_rel_err(rk);
    r.wall_ms = ms;
    out.push_back(r);
  }
  return out;
}

EvalResult hgm_x(int k, int n, double lambda, double x0, double x, const HgmXOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ic = make_ic(k, n, lambda, x0, IcMethod::series, opts.ctl);
  EvalResult r = hgm_x_grid(k, n, lambda, ic, {x}, opts.rk).front();
  r.wall_ms = elapsed_ms(t0);
  return r;
}

std::vector<EvalResult> hgm_x_enhanced_grid(int k, int n, double lambda, const InitialCondition& ic,
                                            const std::vector<double>& xs, const RkOptions& rk) {
  check_kn(k, n);
  require(lambda >= 0.0, ErrorCode::domain, "hgm_x_enhanced: lambda must be >= 0");
  require(!xs.empty(), ErrorCode::invalid_argument, "hgm_x_enhanced: empty grid");
  require(ic.phi0 > 0.0, ErrorCode::singular_point, "hgm_x_enhanced: initial point must be > 0");
  const auto t0 = std::chrono::steady_clock::now();
  Enhanced en{k, n, lambda, std::sqrt(lambda)};
  const double psi = en.psi;

  std::vector<double> phis;
  for (double x : xs) {
    require(x > 0.0, ErrorCode::singular_point, "hgm_x_enhanced: x must be > 0");
    require(x >= ic.x0, ErrorCode::invalid_argument, "hgm_x_enhanced: grid point below the initial condition");
    phis.push_back(std::sqrt(x));
  }
  const double target = *std::max_element(phis.begin(), phis.end());

  // Initial scaled state.
  bool g3 = ic.phi0 >= psi;
  Vec<3> h{0.0, ic.v, ic.theta_v};
  if (!ic.H.is_zero()) {
    const double shift = (ic.H.expo - lambda) + en.d(ic.phi0, g3);
    if (std::fabs(shift) < 600.0) {
      h[0] = ic.H.mant * std::exp(shift);
    } else {
      const double lh = std::log(std::fabs(ic.H.mant)) + shift;
      en.e1 = static_cast<int>(std::floor(lh / kLn2));
      h[0] = ic.H.sign() * std::exp(lh - en.e1 * kLn2);
    }
  }
  en.renormalize(h);

  struct Hit {
    double phi;
    Vec<3> h;
    int e1;
    bool g3;
  };
  std::vector<Hit> hits;
  long steps = 0;
  auto run = [&](double from, double to, bool region) {
    std::vector<double> outs;
    for (double ph : phis)
      if (ph > from && ph <= to) outs.push_back(ph);
    Rhs<3> f = [&en, region](double phi, const Vec<3>& y) { return en.rhs(phi, y, region); };
    PostStep<3> post = [&en](double, Vec<3>& y) { return en.renormalize(y); };
    const auto tr = rk_integrate<3>(f, from, h, to, rk, outs, post);
    steps += tr.steps;
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
      const auto& c = tr.points[i];
      hits.push_back({c.t, c.y, static_cast<int>(c.log_scale), region});
    }
    h = tr.points.back().y;
  };

  hits.push_back({ic.phi0, h, en.e1, g3});
  double phi = ic.phi0;
  if (!g3 && target > psi) {
    run(phi, psi, false);
    const double jump = std::exp(-(lambda - psi * psi));
    require(std::fabs(jump - 1.0) < 1e-8, ErrorCode::numerical, "hgm_x_enhanced: gauge handoff mismatch");
    h[0] *= jump;
    phi = psi;
    g3 = true;
  }
  if (target > phi) run(phi, target, g3);

  const double ms = elapsed_ms(t0);
  std::vector<EvalResult> out;
  for (double ph : phis) {
    const Hit* best = nullptr;
    for (const auto& c : hits)
      if (c.phi == ph) best = &c;
    require(best != nullptr, ErrorCode::numerical, "hgm_x_enhanced: missing checkpoint");
    EvalResult r;
    r.value = en.H(best->h[0], best->e1, ph, best->g3);
    r.method = "hgm-enhanced";
    r.steps = steps;
    r.rel_err = ic.rel_err + rk_rel_err(rk);
    r.wall_ms = ms;
    out.push_back(r);
  }
  return out;
}

EvalResult hgm_x_enhanced(int k, int n, double lambda, const InitialCondition& ic, double x, const RkOptions& rk) {
  return hgm_x_enhanced_grid(k, n, lambda, ic, {x}, rk).front();
}

}  // namespace whgm
