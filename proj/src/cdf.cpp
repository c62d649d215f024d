#include "cdf.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "double_double.hpp"
#include "parallel.hpp"

namespace whgm {

namespace {

constexpr double kLn2 = 0.693147180559945309417;

std::string entry_name(int i, int j) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

void check_pair(const Spectrum& spec, const MimoConfig& cfg) {
  spec.validate();
  cfg.validate();
  require(static_cast<int>(spec.size()) == cfg.s(), ErrorCode::invalid_model,
          "spectrum has " + std::to_string(spec.size()) + " eigenvalues but min(n_t, n_r) = " + std::to_string(cfg.s()));
}

template <class T>
T lu_det(std::vector<T> a, int s) {
  T det = T(1.0);
  for (int c = 0; c < s; ++c) {
    int piv = c;
    for (int r = c + 1; r < s; ++r) {
      if (std::fabs(static_cast<double>(a[r * s + c])) > std::fabs(static_cast<double>(a[piv * s + c]))) piv = r;
    }
    if (static_cast<double>(a[piv * s + c]) == 0.0) return T(0.0);
    if (piv != c) {
      for (int j = 0; j < s; ++j) std::swap(a[c * s + j], a[piv * s + j]);
      det = -det;
    }
    const T d = a[c * s + c];
    det = det * d;
    for (int r = c + 1; r < s; ++r) {
      const T f = a[r * s + c] / d;
      if (static_cast<double>(f) == 0.0) continue;
      for (int j = c + 1; j < s; ++j) a[r * s + j] = a[r * s + j] - f * a[c * s + j];
    }
  }
  return det;
}

double default_x0(Method method, const std::vector<double>& xs, const CdfOptions& opts) {
  if (opts.x0 > 0.0) return opts.x0;
  const double xmin = *std::min_element(xs.begin(), xs.end());
  if (method == Method::hgm) return std::min(1e-3, xmin);
  return 0.9 * xmin;
}

}  // namespace

Spectrum Spectrum::make(std::vector<double> lambdas) {
  Spectrum s{std::move(lambdas)};
  s.validate();
  return s;
}

void Spectrum::validate() const {
  require(!lambdas.empty(), ErrorCode::invalid_model, "spectrum is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    require(std::isfinite(lambdas[i]) && lambdas[i] > 0.0, ErrorCode::invalid_model,
            "eigenvalues must be finite and > 0");
    if (i > 0) {
      require(lambdas[i] > lambdas[i - 1], ErrorCode::invalid_model,
              "eigenvalues must be distinct and strictly increasing");
    }
  }
}

double Spectrum::sum() const {
  double s = 0.0;
  for (double l : lambdas) s += l;
  return s;
}

void MimoConfig::validate() const {
  require(n_t >= 1 && n_r >= 1, ErrorCode::invalid_model, "antenna counts must be >= 1");
  require(K >= 0.0 && std::isfinite(K), ErrorCode::invalid_model, "K must be finite and >= 0");
  require(gamma_b > 0.0 && gamma_th > 0.0, ErrorCode::invalid_model, "SNRs must be > 0");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::series: return "series";
    case Method::quadrature: return "quad";
    case Method::hgm: return "hgm";
    case Method::hgm_enhanced: return "hgm-enhanced";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "series") return Method::series;
  if (s == "quad" || s == "quadrature") return Method::quadrature;
  if (s == "hgm") return Method::hgm;
  if (s == "hgm-enhanced" || s == "hgm_enhanced") return Method::hgm_enhanced;
  throw Error(ErrorCode::invalid_argument, "unknown method '" + s + "'");
}

std::vector<PhiMatrix> assemble_phi_grid(const std::vector<double>& xs, const Spectrum& spec, const MimoConfig& cfg,
                                         Method method, const CdfOptions& opts) {
  check_pair(spec, cfg);
  require(!xs.empty(), ErrorCode::invalid_argument, "no x values");
  for (double x : xs) require(std::isfinite(x) && x > 0.0, ErrorCode::domain, "x must be finite and > 0");
  const int s = cfg.s(), t = cfg.t();
  const int n = t - s + 1;
  const std::size_t nx = xs.size();
  std::vector<PhiMatrix> out(nx);
  for (auto& m : out) {
    m.s = s;
    m.entries.assign(static_cast<std::size_t>(s * s), ScaledReal{});
    m.rel_err.assign(static_cast<std::size_t>(s * s), 0.0);
  }
  std::vector<long> work(static_cast<std::size_t>(s * s), 0);
  std::vector<bool> native_col(static_cast<std::size_t>(s) * nx, true);
  if (method == Method::quadrature) {
    for (int j = 0; j < s; ++j)
      for (std::size_t ix = 0; ix < nx; ++ix)
        for (int i = 0; i < s; ++i)
          if (!hkn_quadrature_native(HknParams{t - 1 - i, n}, xs[ix], spec.lambdas[j]))
            native_col[static_cast<std::size_t>(j) * nx + ix] = false;
  }
  const double x0 = (method == Method::hgm || method == Method::hgm_enhanced) ? default_x0(method, xs, opts) : 0.0;

  parallel_for(static_cast<std::size_t>(s * s), opts.threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / s, j = static_cast<int>(idx) % s;
    const int k = t - 1 - i;
    const double lam = spec.lambdas[j];
    const HknParams p{k, n};
    auto store = [&](std::size_t ix, const ScaledReal& v, double rel) {
      out[ix].entries[idx] = v;
      out[ix].rel_err[idx] = rel;
    };
    switch (method) {
      case Method::series:
        for (std::size_t ix = 0; ix < nx; ++ix) {
          const auto r = hkn_series(p, xs[ix], lam, opts.ctl);
          if (!r.converged) {
            throw Error(ErrorCode::not_converged, "series entry " + entry_name(i, j) +
                                                      " did not converge (" + to_string(r.breakdown) + ")");
          }
          store(ix, r.value, r.rel_err);
          work[idx] += r.work;
        }
        break;
      case Method::quadrature:
        for (std::size_t ix = 0; ix < nx; ++ix) {
          QuadOptions q = opts.quad;
          q.mode = native_col[static_cast<std::size_t>(j) * nx + ix] ? QuadMode::native : QuadMode::log;
          const auto r = hkn_quadrature(p, xs[ix], lam, q);
          if (!r.converged) throw Error(ErrorCode::not_converged, "quadrature entry " + entry_name(i, j) + " did not converge");
          store(ix, r.value, r.rel_err);
          work[idx] += r.work;
        }
        break;
      case Method::hgm: {
        const auto ic = make_ic(k, n, lam, x0, IcMethod::series, opts.ctl);
        const auto rs = hgm_x_grid(k, n, lam, ic, xs, opts.rk);
        for (std::size_t ix = 0; ix < nx; ++ix) {
          store(ix, rs[ix].value, rs[ix].rel_err);
        }
        work[idx] += rs.front().steps;
        break;
      }
      case Method::hgm_enhanced: {
        QuadOptions q = opts.quad;
        q.mode = QuadMode::log;
        const auto ic = make_ic(k, n, lam, x0, IcMethod::quadrature, opts.ctl, q);
        const auto rs = hgm_x_enhanced_grid(k, n, lam, ic, xs, opts.rk);
        for (std::size_t ix = 0; ix < nx; ++ix) store(ix, rs[ix].value, rs[ix].rel_err);
        work[idx] += rs.front().steps;
        break;
      }
    }
  });
  const long total = std::accumulate(work.begin(), work.end(), 0L);
  for (auto& m : out) m.work = total;
  return out;
}

PhiMatrix assemble_phi(double x, const Spectrum& spec, const MimoConfig& cfg, Method method, const CdfOptions& opts) {
  return assemble_phi_grid({x}, spec, cfg, method, opts).front();
}

ScaledReal log_prefactor(const Spectrum& spec, const MimoConfig& cfg) {
  check_pair(spec, cfg);
  const auto& l = spec.lambdas;
  const int s = cfg.s(), t = cfg.t();
  for (std::size_t i = 1; i < l.size(); ++i) {
    require(l[i] - l[i - 1] >= 1e-12 * l.back(), ErrorCode::invalid_model,
            "spectrum is nearly degenerate; the determinant is ill-conditioned");
  }
  ScaledReal den = ScaledReal::one();
  for (int i = 0; i < s; ++i)
    for (int j = i + 1; j < s; ++j) den = den * ScaledReal::from_double(l[i] - l[j]);
  double fact = 1.0;
  for (int i = 2; i <= t - s; ++i) fact *= i;
  for (int i = 0; i < s; ++i) den = den * ScaledReal::from_double(fact);
  double neg_sum = 0.0;
  for (double v : l) neg_sum -= v;
  return ScaledReal{1.0 / den.mant, neg_sum - den.expo};
}

ScaledReal det_scaled(const std::vector<ScaledReal>& m, int s, Precision precision) {
  require(s >= 1 && m.size() == static_cast<std::size_t>(s * s), ErrorCode::invalid_argument,
          "det_scaled: matrix must be square");
  std::vector<double> a(m.size());
  double expo_sum = 0.0;
  for (int j = 0; j < s; ++j) {
    int best = -1;
    double best_log = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < s; ++i) {
      const auto& e = m[static_cast<std::size_t>(i * s + j)];
      require(e.is_finite(), ErrorCode::numerical, "det_scaled: non-finite entry");
      if (!e.is_zero() && e.log_mag() > best_log) {
        best_log = e.log_mag();
        best = i;
      }
    }
    if (best < 0) return ScaledReal::zero();
    const ScaledReal ref = m[static_cast<std::size_t>(best * s + j)].normalized();
    for (int i = 0; i < s; ++i) a[static_cast<std::size_t>(i * s + j)] = m[static_cast<std::size_t>(i * s + j)].mant_at(ref.expo);
    expo_sum += ref.expo;
  }
  long row_exp = 0;
  for (int i = 0; i < s; ++i) {
    double mx = 0.0;
    for (int j = 0; j < s; ++j) mx = std::max(mx, std::fabs(a[static_cast<std::size_t>(i * s + j)]));
    if (mx == 0.0) return ScaledReal::zero();
    const int e = std::ilogb(mx);
    for (int j = 0; j < s; ++j) a[static_cast<std::size_t>(i * s + j)] = std::ldexp(a[static_cast<std::size_t>(i * s + j)], -e);
    row_exp += e;
  }
  double d;
  if (precision == Precision::double_double) {
    std::vector<DoubleDouble> dd(a.begin(), a.end());
    d = static_cast<double>(lu_det(std::move(dd), s));
  } else {
    d = lu_det(std::move(a), s);
  }
  if (d == 0.0) return ScaledReal::zero();
  if (std::abs(row_exp) < 900) {
    const double md = std::ldexp(d, static_cast<int>(row_exp));
    if (std::isfinite(md) && md != 0.0 && std::fabs(md) > 1e-290) return ScaledReal{md, expo_sum}.normalized();
  }
  return ScaledReal{d, expo_sum + static_cast<double>(row_exp) * kLn2}.normalized();
}

double error_estimate(const PhiMatrix& phi, const std::vector<double>& entry_errs_rel, const ScaledReal& prefactor,
                      int trials, std::uint64_t seed, Precision precision) {
  require(entry_errs_rel.size() == phi.entries.size(), ErrorCode::invalid_argument,
          "error_estimate: error matrix has the wrong shape");
  if (trials <= 0) return 0.0;
  if (std::all_of(entry_errs_rel.begin(), entry_errs_rel.end(), [](double e) { return e == 0.0; })) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(trials));
  for (int tr = 0; tr < trials; ++tr) {
    std::vector<ScaledReal> m = phi.entries;
    for (std::size_t i = 0; i < m.size(); ++i) m[i].mant *= 1.0 + u(rng) * entry_errs_rel[i];
    vals.push_back((prefactor * det_scaled(m, phi.s, precision)).to_double());
  }
  if (vals.size() < 2) return 0.0;
  const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(vals.size() - 1));
}

double error_estimate(const PhiMatrix& phi, const std::vector<ScaledReal>& entry_errs, const ScaledReal& prefactor,
                      int trials, std::uint64_t seed, Precision precision) {
  require(entry_errs.size() == phi.entries.size(), ErrorCode::invalid_argument,
          "error_estimate: error matrix has the wrong shape");
  std::vector<double> rel(entry_errs.size(), 0.0);
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (entry_errs[i].is_zero()) continue;
    require(!phi.entries[i].is_zero(), ErrorCode::invalid_argument,
            "error_estimate: nonzero error on a zero entry");
    rel[i] = (entry_errs[i].abs() / phi.entries[i].abs()).to_double();
  }
  return error_estimate(phi, rel, prefactor, trials, seed, precision);
}

std::vector<CdfResult> cdf_curve(const std::vector<double>& xs, const Spectrum& spec, const MimoConfig& cfg,
                                 Method method, const CdfOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScaledReal pref = log_prefactor(spec, cfg);
  const auto phis = assemble_phi_grid(xs, spec, cfg, method, opts);
  std::vector<CdfResult> out;
  out.reserve(xs.size());
  for (std::size_t ix = 0; ix < xs.size(); ++ix) {
    const auto& phi = phis[ix];
    CdfResult r;
    r.x = xs[ix];
    r.method = method;
    r.scaled = pref * det_scaled(phi.entries, phi.s, opts.precision);
    r.value = r.scaled.to_double();
    r.abs_err = error_estimate(phi, phi.rel_err, pref, opts.trials, opts.seed + ix, opts.precision);
    r.out_of_range = r.value < -0.01 || r.value > 1.01;
    r.cancellation = r.out_of_range || std::fabs(r.value) < 1e-16 || r.abs_err >= std::fabs(r.value);
    r.work = phi.work;
    out.push_back(r);
  }
  const double ms = elapsed_ms(t0) / static_cast<double>(xs.size());
  for (auto& r : out) r.wall_ms = ms;
  return out;
}

CdfResult cdf_largest_eig(double x, const Spectrum& spec, const MimoConfig& cfg, Method method,
                          const CdfOptions& opts) {
  return cdf_curve({x}, spec, cfg, method, opts).front();
}

double outage_threshold(const MimoConfig& cfg) {
  cfg.validate();
  return (cfg.K + 1.0) * cfg.gamma_th / cfg.gamma_b;
}

CdfResult outage_probability(const Spectrum& spec, const MimoConfig& cfg, Method method, const CdfOptions& opts) {
  return cdf_largest_eig(outage_threshold(cfg), spec, cfg, method, opts);
}

Spectrum spectrum_from_k(const std::vector<double>& shape, double K, int n_t, int n_r) {
  require(!shape.empty(), ErrorCode::invalid_model, "shape is empty");
  require(n_t >= 1 && n_r >= 1, ErrorCode::invalid_model, "antenna counts must be >= 1");
  require(K > 0.0 && std::isfinite(K), ErrorCode::invalid_model,
          "K must be > 0: K = 0 gives an all-zero spectrum");
  double total = 0.0;
  for (double v : shape) {
    require(std::isfinite(v) && v > 0.0, ErrorCode::invalid_model, "shape entries must be > 0");
    total += v;
  }
  std::vector<double> l(shape);
  std::sort(l.begin(), l.end());
  const double scale = K * n_t * n_r / total;
  for (double& v : l) v *= scale;
  for (std::size_t i = 1; i < l.size(); ++i) {
    require(l[i] > l[i - 1], ErrorCode::invalid_model, "shape entries must be distinct");
  }
  return Spectrum{std::move(l)};
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double v) { return 10.0 * std::log10(v); }

}  // namespace whgm
