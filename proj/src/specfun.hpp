#pragma once

#include "errors.hpp"

namespace whgm {

enum class Summation { plain, compensated };

/// Truncation control for power series.
struct SeriesControl {
  double eps = 1e-15;
  int max_terms = 10000;
  Summation summation = Summation::plain;

  void validate() const;
};

/// Thrown when a series exhausts max_terms; carries the last partial sum.
class SeriesNotConverged : public Error {
 public:
  SeriesNotConverged(const std::string& what, double partial, int terms)
      : Error(ErrorCode::not_converged, what), partial_sum(partial), terms_used(terms) {}
  double partial_sum;
  int terms_used;
};

struct SeriesValue {
  double value = 0.0;
  int terms = 0;
};

struct SignedLog {
  double log_abs = 0.0;
  int sign = 1;
};

/// Rising factorial (a)_i.
double pochhammer(double a, int i);
SignedLog log_pochhammer(double a, int i);

/// 0F1(;n;z) by its power series.
SeriesValue of1(int n, double z, const SeriesControl& ctl = {});
/// theta_z 0F1(;n;z) = z d/dz 0F1, term-wise.
SeriesValue of1_theta(int n, double z, const SeriesControl& ctl = {});

/// c_n e^{2 sqrt z} (sqrt z)^{-n+1/2}; overflows to inf for huge z.
double of1_asymptotic(int n, double z);
double log_of1_asymptotic(int n, double z);
/// Leading constant of the large-z form.
double of1_asymptotic_constant(int n);

/// log 0F1(;n;z) for any z >= 0 (series when small, scaled Bessel otherwise).
double log_of1(int n, double z);
/// e^{-y} 0F1(;n;y^2/4), accurate for large y.
double of1_exp_scaled(int n, double y);
/// theta_z 0F1 / 0F1.
double of1_theta_ratio(int n, double z);

/// gamma(a, x) = int_0^x y^{a-1} e^{-y} dy.
double lower_incomplete_gamma(double a, double x);
double log_lower_incomplete_gamma(double a, double x);
/// P(a, x) = gamma(a, x) / Gamma(a).
double regularized_gamma_p(double a, double x);

}  // namespace whgm
