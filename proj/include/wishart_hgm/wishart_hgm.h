/* C interface to the wishart_hgm library.
 *
 * Every call returns a whgm_status. On failure the message is available from
 * whgm_last_error() on the calling thread until the next failing call.
 * Handles are opaque and owned by the caller. */
#ifndef WISHART_HGM_H
#define WISHART_HGM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(WHGM_BUILDING_LIBRARY)
#    define WHGM_API __declspec(dllexport)
#  else
#    define WHGM_API __declspec(dllimport)
#  endif
#else
#  define WHGM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum whgm_status {
  WHGM_OK = 0,
  WHGM_E_INVALID_ARGUMENT = 1,
  WHGM_E_INVALID_MODEL = 2,
  WHGM_E_DOMAIN = 3,
  WHGM_E_SINGULAR_POINT = 4,
  WHGM_E_NOT_CONVERGED = 5,
  WHGM_E_NUMERICAL = 6,
  WHGM_E_INTERNAL = 7
} whgm_status;

typedef enum whgm_method {
  WHGM_METHOD_SERIES = 0,
  WHGM_METHOD_QUADRATURE = 1,
  WHGM_METHOD_HGM = 2,
  WHGM_METHOD_HGM_ENHANCED = 3
} whgm_method;

typedef enum whgm_breakdown {
  WHGM_BREAKDOWN_NONE = 0,
  WHGM_BREAKDOWN_STALL = 1,
  WHGM_BREAKDOWN_MAX_TERMS = 2,
  WHGM_BREAKDOWN_NON_FINITE = 3,
  WHGM_BREAKDOWN_QUADRATURE_BUDGET = 4
} whgm_breakdown;

typedef struct whgm_model whgm_model;
typedef struct whgm_options whgm_options;

/* A value that may lie outside double range is given both as value (possibly
 * 0 or inf) and as sign * 10^log10_abs. */
typedef struct whgm_hkn_result {
  double value;
  double log10_abs;
  int sign;
  double rel_err;
  /* Series: shells N. Quadrature: integrand evaluations. HGM: RK steps. */
  long work;
  int converged;
  whgm_breakdown breakdown;
} whgm_hkn_result;

typedef struct whgm_cdf_point {
  double x;
  /* Raw, unclamped. */
  double value;
  double log10_abs;
  int sign;
  double abs_err;
  int cancellation;
  int out_of_range;
  double wall_ms;
  long work;
} whgm_cdf_point;

typedef struct whgm_mc_estimate {
  double p_hat;
  long n_samples;
  double std_err;
} whgm_mc_estimate;

WHGM_API const char* whgm_version(void);
WHGM_API const char* whgm_last_error(void);
WHGM_API const char* whgm_status_name(whgm_status status);
WHGM_API const char* whgm_method_name(whgm_method method);
/* Accepts series, quad, quadrature, hgm, hgm-enhanced. */
WHGM_API whgm_status whgm_method_parse(const char* name, whgm_method* out);
WHGM_API const char* whgm_breakdown_name(whgm_breakdown b);
WHGM_API const char* whgm_rng_description(void);

/* Eigenvalues must be positive and distinct; they are sorted on input.
 * Their count must equal min(n_t, n_r). */
WHGM_API whgm_status whgm_model_create(int n_t, int n_r, double K, const double* lambdas, size_t count,
                                       whgm_model** out);
/* Spectrum from a shape rescaled to sum K n_t n_r (K linear, > 0). */
WHGM_API whgm_status whgm_model_from_shape(int n_t, int n_r, double K, const double* shape, size_t count,
                                           whgm_model** out);
WHGM_API void whgm_model_destroy(whgm_model* model);
WHGM_API whgm_status whgm_model_info(const whgm_model* model, int* n_t, int* n_r, double* K, size_t* count);
/* Copies min(capacity, count) eigenvalues in ascending order. */
WHGM_API whgm_status whgm_model_lambdas(const whgm_model* model, double* out, size_t capacity);

WHGM_API whgm_status whgm_options_create(whgm_options** out);
WHGM_API void whgm_options_destroy(whgm_options* opts);
WHGM_API whgm_status whgm_options_set_series_eps(whgm_options* opts, double eps);
WHGM_API whgm_status whgm_options_set_series_max_terms(whgm_options* opts, int max_terms);
WHGM_API whgm_status whgm_options_set_quad_tol(whgm_options* opts, double tol);
/* Adaptive Dormand-Prince 8(5,3) with this relative tolerance. */
WHGM_API whgm_status whgm_options_set_rk_tol(whgm_options* opts, double rel_tol);
/* Classic RK4 with fixed step h; h <= 0 returns to adaptive stepping. */
WHGM_API whgm_status whgm_options_set_rk_fixed_step(whgm_options* opts, double h);
/* 0 picks the default starting point. */
WHGM_API whgm_status whgm_options_set_x0(whgm_options* opts, double x0);
/* Nonzero selects paired-double determinant arithmetic (default). */
WHGM_API whgm_status whgm_options_set_double_double(whgm_options* opts, int enabled);
/* Perturbation trials for the CDF error estimate; 0 disables it. */
WHGM_API whgm_status whgm_options_set_error_trials(whgm_options* opts, int trials);
WHGM_API whgm_status whgm_options_set_seed(whgm_options* opts, uint64_t seed);
/* 0 uses hardware concurrency. */
WHGM_API whgm_status whgm_options_set_threads(whgm_options* opts, int threads);

/* H^k_n(x, lambda). opts may be NULL. On non-convergence out is still filled
 * and WHGM_E_NOT_CONVERGED is returned. */
WHGM_API whgm_status whgm_hkn(int k, int n, double x, double lambda, whgm_method method, const whgm_options* opts,
                              whgm_hkn_result* out);

/* Pr(phi_max <= x) at each of count points. */
WHGM_API whgm_status whgm_cdf(const whgm_model* model, whgm_method method, const whgm_options* opts,
                              const double* xs, size_t count, whgm_cdf_point* out);

/* Outage at x = (K + 1) gamma_th / gamma_b for each gamma_b (linear). */
WHGM_API whgm_status whgm_outage(const whgm_model* model, whgm_method method, const whgm_options* opts,
                                 double gamma_th, const double* gamma_b, size_t count, whgm_cdf_point* out);

/* Monte-Carlo estimate at each x from one set of samples (n_samples >= 1000). */
WHGM_API whgm_status whgm_mc_cdf(const whgm_model* model, const double* xs, size_t count, long n_samples,
                                 uint64_t seed, int threads, whgm_mc_estimate* out);

#ifdef __cplusplus
}
#endif

#endif
