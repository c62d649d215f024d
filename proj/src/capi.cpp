#include "wishart_hgm/wishart_hgm.h"

#include <algorithm>
#include <cmath>
#include <new>
#include <string>
#include <vector>

#include "cdf.hpp"
#include "errors.hpp"
#include "hgm.hpp"
#include "hkn.hpp"
#include "oracle.hpp"

#ifndef WHGM_VERSION
#define WHGM_VERSION "0.0.0"
#endif

struct whgm_model {
  whgm::Spectrum spec;
  whgm::MimoConfig cfg;
};

struct whgm_options {
  whgm::CdfOptions cdf;
};

namespace {

thread_local std::string g_last_error;

whgm_status to_status(whgm::ErrorCode c) {
  switch (c) {
    case whgm::ErrorCode::invalid_argument: return WHGM_E_INVALID_ARGUMENT;
    case whgm::ErrorCode::invalid_model: return WHGM_E_INVALID_MODEL;
    case whgm::ErrorCode::domain: return WHGM_E_DOMAIN;
    case whgm::ErrorCode::singular_point: return WHGM_E_SINGULAR_POINT;
    case whgm::ErrorCode::not_converged: return WHGM_E_NOT_CONVERGED;
    case whgm::ErrorCode::numerical: return WHGM_E_NUMERICAL;
  }
  return WHGM_E_INTERNAL;
}

whgm_status fail(whgm_status st, const std::string& msg) {
  g_last_error = msg;
  return st;
}

template <class F>
whgm_status guarded(F&& body) {
  try {
    return body();
  } catch (const whgm::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(WHGM_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WHGM_E_INTERNAL, e.what());
  } catch (...) {
    return fail(WHGM_E_INTERNAL, "unknown error");
  }
}

#define WHGM_CHECK_ARG(cond, msg) \
  do {                            \
    if (!(cond)) return fail(WHGM_E_INVALID_ARGUMENT, msg); \
  } while (0)

whgm::Method to_method(whgm_method m) {
  switch (m) {
    case WHGM_METHOD_SERIES: return whgm::Method::series;
    case WHGM_METHOD_QUADRATURE: return whgm::Method::quadrature;
    case WHGM_METHOD_HGM: return whgm::Method::hgm;
    case WHGM_METHOD_HGM_ENHANCED: return whgm::Method::hgm_enhanced;
  }
  throw whgm::Error(whgm::ErrorCode::invalid_argument, "unknown method");
}

void fill_scaled(const whgm::ScaledReal& v, double& value, double& log10_abs, int& sign) {
  value = v.to_double();
  sign = v.sign();
  log10_abs = v.is_zero() ? -INFINITY : v.log10_abs();
}

whgm_cdf_point to_point(const whgm::CdfResult& r) {
  whgm_cdf_point p{};
  p.x = r.x;
  double ignored = 0.0;
  fill_scaled(r.scaled, ignored, p.log10_abs, p.sign);
  p.value = r.value;
  p.abs_err = r.abs_err;
  p.cancellation = r.cancellation ? 1 : 0;
  p.out_of_range = r.out_of_range ? 1 : 0;
  p.wall_ms = r.wall_ms;
  p.work = r.work;
  return p;
}

whgm_breakdown to_breakdown(whgm::Breakdown b) {
  switch (b) {
    case whgm::Breakdown::none: return WHGM_BREAKDOWN_NONE;
    case whgm::Breakdown::stall: return WHGM_BREAKDOWN_STALL;
    case whgm::Breakdown::max_terms: return WHGM_BREAKDOWN_MAX_TERMS;
    case whgm::Breakdown::non_finite: return WHGM_BREAKDOWN_NON_FINITE;
    case whgm::Breakdown::quadrature_budget: return WHGM_BREAKDOWN_QUADRATURE_BUDGET;
  }
  return WHGM_BREAKDOWN_NONE;
}

const whgm::CdfOptions& options_or_default(const whgm_options* opts) {
  static const whgm::CdfOptions defaults{};
  return opts ? opts->cdf : defaults;
}

}  // namespace

extern "C" {

const char* whgm_version(void) { return WHGM_VERSION; }

const char* whgm_last_error(void) { return g_last_error.c_str(); }

const char* whgm_status_name(whgm_status status) {
  switch (status) {
    case WHGM_OK: return "ok";
    case WHGM_E_INVALID_ARGUMENT: return "invalid_argument";
    case WHGM_E_INVALID_MODEL: return "invalid_model";
    case WHGM_E_DOMAIN: return "domain";
    case WHGM_E_SINGULAR_POINT: return "singular_point";
    case WHGM_E_NOT_CONVERGED: return "not_converged";
    case WHGM_E_NUMERICAL: return "numerical";
    case WHGM_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* whgm_method_name(whgm_method method) {
  try {
    return whgm::to_string(to_method(method));
  } catch (...) {
    return "unknown";
  }
}

whgm_status whgm_method_parse(const char* name, whgm_method* out) {
  WHGM_CHECK_ARG(name && out, "null argument");
  return guarded([&] {
    switch (whgm::method_from_string(name)) {
      case whgm::Method::series: *out = WHGM_METHOD_SERIES; break;
      case whgm::Method::quadrature: *out = WHGM_METHOD_QUADRATURE; break;
      case whgm::Method::hgm: *out = WHGM_METHOD_HGM; break;
      case whgm::Method::hgm_enhanced: *out = WHGM_METHOD_HGM_ENHANCED; break;
    }
    return WHGM_OK;
  });
}

const char* whgm_breakdown_name(whgm_breakdown b) {
  switch (b) {
    case WHGM_BREAKDOWN_NONE: return whgm::to_string(whgm::Breakdown::none);
    case WHGM_BREAKDOWN_STALL: return whgm::to_string(whgm::Breakdown::stall);
    case WHGM_BREAKDOWN_MAX_TERMS: return whgm::to_string(whgm::Breakdown::max_terms);
    case WHGM_BREAKDOWN_NON_FINITE: return whgm::to_string(whgm::Breakdown::non_finite);
    case WHGM_BREAKDOWN_QUADRATURE_BUDGET: return whgm::to_string(whgm::Breakdown::quadrature_budget);
  }
  return "unknown";
}

const char* whgm_rng_description(void) { return whgm::rng_description(); }

whgm_status whgm_model_create(int n_t, int n_r, double K, const double* lambdas, size_t count, whgm_model** out) {
  WHGM_CHECK_ARG(out, "null output handle");
  *out = nullptr;
  WHGM_CHECK_ARG(lambdas || count == 0, "null eigenvalue array");
  return guarded([&] {
    std::vector<double> l(lambdas, lambdas + count);
    std::sort(l.begin(), l.end());
    whgm::MimoConfig cfg;
    cfg.n_t = n_t;
    cfg.n_r = n_r;
    cfg.K = K;
    cfg.validate();
    auto spec = whgm::Spectrum::make(std::move(l));
    whgm::require(static_cast<int>(spec.size()) == cfg.s(), whgm::ErrorCode::invalid_model,
                  "need min(n_t, n_r) = " + std::to_string(cfg.s()) + " eigenvalues, got " +
                      std::to_string(spec.size()));
    *out = new whgm_model{std::move(spec), cfg};
    return WHGM_OK;
  });
}

whgm_status whgm_model_from_shape(int n_t, int n_r, double K, const double* shape, size_t count, whgm_model** out) {
  WHGM_CHECK_ARG(out, "null output handle");
  *out = nullptr;
  WHGM_CHECK_ARG(shape || count == 0, "null shape array");
  return guarded([&] {
    auto spec = whgm::spectrum_from_k(std::vector<double>(shape, shape + count), K, n_t, n_r);
    return whgm_model_create(n_t, n_r, K, spec.lambdas.data(), spec.size(), out);
  });
}

void whgm_model_destroy(whgm_model* model) { delete model; }

whgm_status whgm_model_info(const whgm_model* model, int* n_t, int* n_r, double* K, size_t* count) {
  WHGM_CHECK_ARG(model, "null model");
  if (n_t) *n_t = model->cfg.n_t;
  if (n_r) *n_r = model->cfg.n_r;
  if (K) *K = model->cfg.K;
  if (count) *count = model->spec.size();
  return WHGM_OK;
}

whgm_status whgm_model_lambdas(const whgm_model* model, double* out, size_t capacity) {
  WHGM_CHECK_ARG(model && (out || capacity == 0), "null argument");
  const size_t m = std::min(capacity, model->spec.size());
  std::copy_n(model->spec.lambdas.begin(), m, out);
  return WHGM_OK;
}

whgm_status whgm_options_create(whgm_options** out) {
  WHGM_CHECK_ARG(out, "null output handle");
  return guarded([&] {
    *out = new whgm_options{};
    return WHGM_OK;
  });
}

void whgm_options_destroy(whgm_options* opts) { delete opts; }

whgm_status whgm_options_set_series_eps(whgm_options* opts, double eps) {
  WHGM_CHECK_ARG(opts, "null options");
  WHGM_CHECK_ARG(eps > 0.0 && eps < 1.0, "eps must be in (0, 1)");
  opts->cdf.ctl.eps = eps;
  return WHGM_OK;
}

whgm_status whgm_options_set_series_max_terms(whgm_options* opts, int max_terms) {
  WHGM_CHECK_ARG(opts, "null options");
  WHGM_CHECK_ARG(max_terms >= 1, "max_terms must be >= 1");
  opts->cdf.ctl.max_terms = max_terms;
  return WHGM_OK;
}

whgm_status whgm_options_set_quad_tol(whgm_options* opts, double tol) {
  WHGM_CHECK_ARG(opts, "null options");
  WHGM_CHECK_ARG(tol > 0.0 && tol < 1.0, "tol must be in (0, 1)");
  opts->cdf.quad.tol = tol;
  return WHGM_OK;
}

whgm_status whgm_options_set_rk_tol(whgm_options* opts, double rel_tol) {
  WHGM_CHECK_ARG(opts, "null options");
  WHGM_CHECK_ARG(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must be in (0, 1)");
  opts->cdf.rk.mode = whgm::RkMode::adaptive;
  opts->cdf.rk.rel_tol = rel_tol;
  return WHGM_OK;
}

whgm_status whgm_options_set_rk_fixed_step(whgm_options* opts, double h) {
  WHGM_CHECK_ARG(opts, "null options");
  WHGM_CHECK_ARG(std::isfinite(h), "step must be finite");
  if (h <= 0.0) {
    opts->cdf.rk.mode = whgm::RkMode::adaptive;
  } else {
    opts->cdf.rk.mode = whgm::RkMode::fixed;
    opts->cdf.rk.step = h;
  }
  return WHGM_OK;
}

whgm_status whgm_options_set_x0(whgm_options* opts, double x0) {
  WHGM_CHECK_ARG(opts, "null options");
  WHGM_CHECK_ARG(std::isfinite(x0) && x0 >= 0.0, "x0 must be finite and >= 0");
  opts->cdf.x0 = x0;
  return WHGM_OK;
}

whgm_status whgm_options_set_double_double(whgm_options* opts, int enabled) {
  WHGM_CHECK_ARG(opts, "null options");
  opts->cdf.precision = enabled ? whgm::Precision::double_double : whgm::Precision::native;
  return WHGM_OK;
}

whgm_status whgm_options_set_error_trials(whgm_options* opts, int trials) {
  WHGM_CHECK_ARG(opts, "null options");
  WHGM_CHECK_ARG(trials >= 0, "trials must be >= 0");
  opts->cdf.trials = trials;
  return WHGM_OK;
}

whgm_status whgm_options_set_seed(whgm_options* opts, uint64_t seed) {
  WHGM_CHECK_ARG(opts, "null options");
  opts->cdf.seed = seed;
  return WHGM_OK;
}

whgm_status whgm_options_set_threads(whgm_options* opts, int threads) {
  WHGM_CHECK_ARG(opts, "null options");
  WHGM_CHECK_ARG(threads >= 0, "threads must be >= 0");
  opts->cdf.threads = threads;
  return WHGM_OK;
}

whgm_status whgm_hkn(int k, int n, double x, double lambda, whgm_method method, const whgm_options* opts,
                     whgm_hkn_result* out) {
  WHGM_CHECK_ARG(out, "null result");
  *out = whgm_hkn_result{};
  return guarded([&] {
    const whgm::CdfOptions& o = options_or_default(opts);
    const whgm::HknParams p{k, n};
    p.validate();
    whgm::require(std::isfinite(x) && x >= 0.0, whgm::ErrorCode::domain, "x must be finite and >= 0");
    whgm::require(std::isfinite(lambda) && lambda >= 0.0, whgm::ErrorCode::domain, "lambda must be finite and >= 0");
    if (x == 0.0) {
      out->value = 0.0;
      out->log10_abs = -INFINITY;
      out->converged = 1;
      return WHGM_OK;
    }
    switch (to_method(method)) {
      case whgm::Method::series:
      case whgm::Method::quadrature: {
        const whgm::HknResult r = method == WHGM_METHOD_SERIES ? whgm::hkn_series(p, x, lambda, o.ctl)
                                                               : whgm::hkn_quadrature(p, x, lambda, o.quad);
        fill_scaled(r.value, out->value, out->log10_abs, out->sign);
        out->rel_err = r.rel_err;
        out->work = r.work;
        out->converged = r.converged ? 1 : 0;
        out->breakdown = to_breakdown(r.breakdown);
        if (!r.converged) {
          std::string msg = std::string("no convergence: ") + whgm::to_string(r.breakdown) + " after " +
                            std::to_string(r.work) + (method == WHGM_METHOD_SERIES ? " shells" : " evaluations");
          if (!r.value.is_finite()) msg += ", partial sum non-finite";
          return fail(WHGM_E_NOT_CONVERGED, msg);
        }
        return WHGM_OK;
      }
      case whgm::Method::hgm: {
        const double x0 = o.x0 > 0.0 ? std::min(o.x0, x) : std::min(1e-3, x);
        const whgm::EvalResult r = whgm::hgm_x(k, n, lambda, x0, x, whgm::HgmXOptions{o.rk, o.ctl});
        fill_scaled(r.value, out->value, out->log10_abs, out->sign);
        out->rel_err = r.rel_err;
        out->work = r.steps;
        out->converged = 1;
        return WHGM_OK;
      }
      case whgm::Method::hgm_enhanced: {
        const double x0 = o.x0 > 0.0 ? std::min(o.x0, x) : 0.9 * x;
        const auto ic = whgm::make_ic(k, n, lambda, x0, whgm::IcMethod::quadrature, o.ctl, o.quad);
        const whgm::EvalResult r = whgm::hgm_x_enhanced(k, n, lambda, ic, x, o.rk);
        fill_scaled(r.value, out->value, out->log10_abs, out->sign);
        out->rel_err = r.rel_err;
        out->work = r.steps;
        out->converged = 1;
        return WHGM_OK;
      }
    }
    return fail(WHGM_E_INVALID_ARGUMENT, "unknown method");
  });
}

whgm_status whgm_cdf(const whgm_model* model, whgm_method method, const whgm_options* opts, const double* xs,
                     size_t count, whgm_cdf_point* out) {
  WHGM_CHECK_ARG(model, "null model");
  WHGM_CHECK_ARG((xs && out) || count == 0, "null array");
  if (count == 0) return WHGM_OK;
  return guarded([&] {
    const auto res = whgm::cdf_curve(std::vector<double>(xs, xs + count), model->spec, model->cfg,
                                     to_method(method), options_or_default(opts));
    for (size_t i = 0; i < count; ++i) out[i] = to_point(res[i]);
    return WHGM_OK;
  });
}

whgm_status whgm_outage(const whgm_model* model, whgm_method method, const whgm_options* opts, double gamma_th,
                        const double* gamma_b, size_t count, whgm_cdf_point* out) {
  WHGM_CHECK_ARG(model, "null model");
  WHGM_CHECK_ARG((gamma_b && out) || count == 0, "null array");
  if (count == 0) return WHGM_OK;
  return guarded([&] {
    std::vector<double> xs(count);
    whgm::MimoConfig cfg = model->cfg;
    cfg.gamma_th = gamma_th;
    for (size_t i = 0; i < count; ++i) {
      cfg.gamma_b = gamma_b[i];
      xs[i] = whgm::outage_threshold(cfg);
    }
    const auto res = whgm::cdf_curve(xs, model->spec, model->cfg, to_method(method), options_or_default(opts));
    for (size_t i = 0; i < count; ++i) out[i] = to_point(res[i]);
    return WHGM_OK;
  });
}

whgm_status whgm_mc_cdf(const whgm_model* model, const double* xs, size_t count, long n_samples, uint64_t seed,
                        int threads, whgm_mc_estimate* out) {
  WHGM_CHECK_ARG(model, "null model");
  WHGM_CHECK_ARG((xs && out) || count == 0, "null array");
  WHGM_CHECK_ARG(threads >= 0, "threads must be >= 0");
  return guarded([&] {
    const auto est = whgm::empirical_cdf_grid(std::vector<double>(xs, xs + count), model->spec, model->cfg,
                                              n_samples, seed, threads);
    for (size_t i = 0; i < count; ++i) out[i] = whgm_mc_estimate{est[i].p_hat, est[i].n_samples, est[i].std_err};
    return WHGM_OK;
  });
}

}  // extern "C"
