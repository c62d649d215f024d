#include "scaled_real.hpp"

#include <cstdio>

namespace whgm {

namespace {
constexpr double kLn10 = 2.302585092994045684;
constexpr double kMantLogLimit = 200.0 * kLn10;
}  // namespace

ScaledReal ScaledReal::from_log(int sign, double log_mag) {
  if (sign == 0 || log_mag == -std::numeric_limits<double>::infinity()) return {};
  return {sign > 0 ? 1.0 : -1.0, log_mag};
}

double ScaledReal::log_mag() const {
  if (mant == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(std::fabs(mant)) + expo;
}

double ScaledReal::to_double() const {
  if (mant == 0.0) return 0.0;
  if (expo == 0.0) return mant;
  return sign() * std::exp(log_mag());
}

bool ScaledReal::representable() const {
  return mant == 0.0 || std::fabs(log10_abs()) < kNativeLog10Limit;
}

ScaledReal ScaledReal::normalized() const {
  if (mant == 0.0 || !std::isfinite(mant)) return *this;
  const double lm = std::log(std::fabs(mant));
  if (std::fabs(lm) < kMantLogLimit) return *this;
  return {mant > 0 ? 1.0 : -1.0, expo + lm};
}

double ScaledReal::mant_at(double e) const {
  if (mant == 0.0) return 0.0;
  if (e == expo) return mant;
  return sign() * std::exp(std::log(std::fabs(mant)) + (expo - e));
}

std::string ScaledReal::to_string(int digits) const {
  if (mant == 0.0) return "0";
  if (!is_finite()) return std::isnan(mant) || std::isnan(expo) ? "nan" : (mant < 0 ? "-inf" : "inf");
  const double l10 = log10_abs();
  double e = std::floor(l10);
  double m = std::pow(10.0, l10 - e);
  if (m >= 10.0) {
    m /= 10.0;
    e += 1.0;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.*fe%+.0f", mant < 0 ? "-" : "", digits - 1, m, e);
  return buf;
}

ScaledReal operator*(const ScaledReal& a, const ScaledReal& b) {
  if (a.mant == 0.0 || b.mant == 0.0) return {};
  const ScaledReal an = a.normalized(), bn = b.normalized();
  return ScaledReal{an.mant * bn.mant, an.expo + bn.expo}.normalized();
}

ScaledReal operator/(const ScaledReal& a, const ScaledReal& b) {
  if (b.mant == 0.0) return {a.mant == 0.0 ? std::numeric_limits<double>::quiet_NaN() : a.mant / 0.0, 0.0};
  if (a.mant == 0.0) return {};
  const ScaledReal an = a.normalized(), bn = b.normalized();
  return ScaledReal{an.mant / bn.mant, an.expo - bn.expo}.normalized();
}

ScaledReal operator+(const ScaledReal& a, const ScaledReal& b) {
  if (a.mant == 0.0) return b;
  if (b.mant == 0.0) return a;
  if (a.expo == b.expo) return ScaledReal{a.mant + b.mant, a.expo}.normalized();
  const bool a_big = a.log_mag() >= b.log_mag();
  const ScaledReal& big = a_big ? a : b;
  const ScaledReal& small = a_big ? b : a;
  return ScaledReal{big.mant + small.mant_at(big.expo), big.expo}.normalized();
}

ScaledReal operator-(const ScaledReal& a, const ScaledReal& b) { return a + (-b); }

}  // namespace whgm
