#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace whgm {

/// Real number mant * e^expo, with expo an arbitrary natural-log offset.
///
/// Carries values such as H(1e8, 1e8) ~ 10^43429447 that are far outside the
/// range of double. The offset is kept as given by the producer, so two
/// numbers built on the same offset combine without rounding the offset.
/// Zero is mant == 0.
struct ScaledReal {
  double mant = 0.0;
  double expo = 0.0;

  static ScaledReal from_double(double v) { return {v, 0.0}; }
  static ScaledReal from_log(int sign, double log_mag);
  static ScaledReal from_parts(double mant, double expo) { return ScaledReal{mant, expo}.normalized(); }
  static ScaledReal zero() { return {}; }
  static ScaledReal one() { return {1.0, 0.0}; }

  int sign() const { return mant > 0 ? 1 : (mant < 0 ? -1 : 0); }
  bool is_zero() const { return mant == 0.0; }
  bool is_finite() const { return std::isfinite(mant) && std::isfinite(expo); }
  /// Natural log of |value|; -inf for zero.
  double log_mag() const;
  double log10_abs() const { return log_mag() / std::log(10.0); }
  /// Saturates to +-inf or flushes to 0 when outside the double range.
  double to_double() const;
  bool representable() const;

  /// Same value, significand moved to +-1 when it drifts far from unity.
  ScaledReal normalized() const;
  /// Same value expressed on offset e; may lose the value if out of range.
  double mant_at(double e) const;

  ScaledReal operator-() const { return {-mant, expo}; }
  ScaledReal abs() const { return {std::fabs(mant), expo}; }
  /// Multiply by e^shift.
  ScaledReal scaled_by_exp(double shift) const { return {mant, expo + shift}; }

  std::string to_string(int digits = 10) const;
};

ScaledReal operator*(const ScaledReal& a, const ScaledReal& b);
ScaledReal operator/(const ScaledReal& a, const ScaledReal& b);
ScaledReal operator+(const ScaledReal& a, const ScaledReal& b);
ScaledReal operator-(const ScaledReal& a, const ScaledReal& b);

/// Magnitudes whose log10 exceeds this switch evaluators to log-domain paths.
inline constexpr double kNativeLog10Limit = 280.0;

}  // namespace whgm
