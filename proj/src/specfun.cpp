#include "specfun.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

namespace whgm {

namespace {

constexpr double kSeriesLimit = 1e4;

struct Accumulator {
  Summation mode;
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    if (mode == Summation::plain) {
      sum += v;
      return;
    }
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Sums sum_i w(i) z^i / ((n)_i i!) for weight w(i) = i^power.
SeriesValue of1_weighted(int n, double z, int power, const SeriesControl& ctl, const char* name) {
  ctl.validate();
  require(n >= 1, ErrorCode::invalid_argument, std::string(name) + ": n must be >= 1");
  require(z >= 0.0 && std::isfinite(z), ErrorCode::domain, std::string(name) + ": z must be finite and >= 0");
  Accumulator acc{ctl.summation};
  if (power == 0) acc.add(1.0);
  if (z == 0.0) return {acc.value(), 1};
  double t = 1.0;
  for (int i = 1; i < ctl.max_terms; ++i) {
    t *= z / ((n + i - 1.0) * i);
    const double w = power == 0 ? t : t * std::pow(static_cast<double>(i), power);
    acc.add(w);
    const double s = acc.value();
    if (!std::isfinite(s)) {
      throw SeriesNotConverged(std::string(name) + ": partial sum overflowed", s, i + 1);
    }
    if (z < (n + i) * (i + 1.0) && w <= ctl.eps * s) return {s, i + 1};
  }
  throw SeriesNotConverged(std::string(name) + ": max_terms reached", acc.value(), ctl.max_terms);
}

double bessel_in_scaled(int nu, double y) {
  gsl_sf_result r;
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  const int status = gsl_sf_bessel_In_scaled_e(nu, y, &r);
  gsl_set_error_handler(old);
  if (status != GSL_SUCCESS) throw Error(ErrorCode::numerical, "bessel In_scaled failed");
  return r.val;
}

}  // namespace

void SeriesControl::validate() const {
  require(eps > 0.0, ErrorCode::invalid_argument, "eps must be > 0");
  require(max_terms >= 1, ErrorCode::invalid_argument, "max_terms must be >= 1");
}

double pochhammer(double a, int i) {
  require(i >= 0, ErrorCode::invalid_argument, "pochhammer: i must be >= 0");
  double r = 1.0;
  for (int j = 0; j < i; ++j) r *= a + j;
  return r;
}

SignedLog log_pochhammer(double a, int i) {
  require(i >= 0, ErrorCode::invalid_argument, "log_pochhammer: i must be >= 0");
  if (a > 0.0 && i >= 1000) return {std::lgamma(a + i) - std::lgamma(a), 1};
  SignedLog r{0.0, 1};
  for (int j = 0; j < i; ++j) {
    const double f = a + j;
    if (f == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    if (f < 0.0) r.sign = -r.sign;
    r.log_abs += std::log(std::fabs(f));
  }
  return r;
}

SeriesValue of1(int n, double z, const SeriesControl& ctl) {
  return of1_weighted(n, z, 0, ctl, "of1");
}

SeriesValue of1_theta(int n, double z, const SeriesControl& ctl) {
  return of1_weighted(n, z, 1, ctl, "of1_theta");
}

double of1_asymptotic_constant(int n) {
  return std::tgamma(static_cast<double>(n)) / (2.0 * std::sqrt(std::numbers::pi));
}

double log_of1_asymptotic(int n, double z) {
  require(n >= 1, ErrorCode::invalid_argument, "of1_asymptotic: n must be >= 1");
  require(z > 0.0, ErrorCode::domain, "of1_asymptotic: z must be > 0");
  const double r = std::sqrt(z);
  return std::lgamma(static_cast<double>(n)) - std::log(2.0 * std::sqrt(std::numbers::pi)) + 2.0 * r +
         (0.5 - n) * std::log(r);
}

double of1_asymptotic(int n, double z) { return std::exp(log_of1_asymptotic(n, z)); }

double log_of1(int n, double z) {
  require(n >= 1, ErrorCode::invalid_argument, "log_of1: n must be >= 1");
  require(z >= 0.0, ErrorCode::domain, "log_of1: z must be >= 0");
  if (z <= kSeriesLimit) return std::log(of1(n, z).value);
  const double y = 2.0 * std::sqrt(z);
  return std::lgamma(static_cast<double>(n)) - 0.5 * (n - 1) * std::log(z) + y +
         std::log(bessel_in_scaled(n - 1, y));
}

double of1_exp_scaled(int n, double y) {
  require(n >= 1, ErrorCode::invalid_argument, "of1_exp_scaled: n must be >= 1");
  require(y >= 0.0, ErrorCode::domain, "of1_exp_scaled: y must be >= 0");
  if (y <= 2.0 * std::sqrt(50.0)) return of1(n, 0.25 * y * y).value * std::exp(-y);
  const double lg = std::lgamma(static_cast<double>(n)) - (n - 1) * std::log(0.5 * y);
  return std::exp(lg) * bessel_in_scaled(n - 1, y);
}

double of1_theta_ratio(int n, double z) {
  require(n >= 1, ErrorCode::invalid_argument, "of1_theta_ratio: n must be >= 1");
  require(z >= 0.0, ErrorCode::domain, "of1_theta_ratio: z must be >= 0");
  if (z == 0.0) return 0.0;
  if (z <= kSeriesLimit) return of1_theta(n, z).value / of1(n, z).value;
  const double y = 2.0 * std::sqrt(z);
  return 0.5 * y * bessel_in_scaled(n, y) / bessel_in_scaled(n - 1, y);
}

double lower_incomplete_gamma(double a, double x) {
  require(a > 0.0, ErrorCode::domain, "lower_incomplete_gamma: a must be > 0");
  require(x >= 0.0, ErrorCode::domain, "lower_incomplete_gamma: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return std::tgamma(a);
  return boost::math::tgamma_lower(a, x);
}

double log_lower_incomplete_gamma(double a, double x) {
  require(a > 0.0, ErrorCode::domain, "log_lower_incomplete_gamma: a must be > 0");
  require(x >= 0.0, ErrorCode::domain, "log_lower_incomplete_gamma: x must be >= 0");
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(regularized_gamma_p(a, x)) + std::lgamma(a);
}

double regularized_gamma_p(double a, double x) {
  require(a > 0.0, ErrorCode::domain, "regularized_gamma_p: a must be > 0");
  require(x >= 0.0, ErrorCode::domain, "regularized_gamma_p: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(a, x);
}

}  // namespace whgm
