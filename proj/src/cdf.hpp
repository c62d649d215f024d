#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgm.hpp"
#include "hkn.hpp"
#include "scaled_real.hpp"

namespace whgm {

/// Eigenvalues of the noncentrality matrix, strictly increasing and positive.
struct Spectrum {
  std::vector<double> lambdas;

  static Spectrum make(std::vector<double> lambdas);
  void validate() const;
  std::size_t size() const { return lambdas.size(); }
  double sum() const;
};

struct MimoConfig {
  int n_t = 1;
  int n_r = 1;
  /// Rician factor, linear.
  double K = 0.0;
  /// Average SNR and detection threshold, linear.
  double gamma_b = 1.0;
  double gamma_th = 1.0;

  int s() const { return std::min(n_t, n_r); }
  int t() const { return std::max(n_t, n_r); }
  void validate() const;
};

enum class Method { series, quadrature, hgm, hgm_enhanced };
const char* to_string(Method m);
/// Accepts series, quad, quadrature, hgm, hgm-enhanced.
Method method_from_string(const std::string& s);

enum class Precision { native, double_double };

struct CdfOptions {
  SeriesControl ctl{1e-15};
  QuadOptions quad{};
  RkOptions rk{};
  /// Initial point for HGM; 0 picks 1e-3 (hgm) or 0.9 min(x) (hgm-enhanced).
  double x0 = 0.0;
  Precision precision = Precision::double_double;
  /// Perturbation trials for the error estimate; 0 disables it.
  int trials = 32;
  std::uint64_t seed = 1;
  /// Worker threads for entry evaluation; 0 uses hardware concurrency.
  int threads = 1;
};

/// s x s matrix of H entries, row-major.
struct PhiMatrix {
  int s = 0;
  std::vector<ScaledReal> entries;
  /// Relative error estimate per entry.
  std::vector<double> rel_err;
  long work = 0;

  const ScaledReal& at(int i, int j) const { return entries[static_cast<std::size_t>(i * s + j)]; }
};

struct CdfResult {
  double x = 0.0;
  /// Raw value, never clamped.
  double value = 0.0;
  ScaledReal scaled;
  double abs_err = 0.0;
  Method method = Method::hgm;
  /// Tiny, uncertain or out-of-range values: cancellation in the determinant.
  bool cancellation = false;
  bool out_of_range = false;
  double wall_ms = 0.0;
  long work = 0;
};

/// Entry (i, j) = H^{t-1-i}_{t-s+1}(x, lambda_j), i, j zero-based.
PhiMatrix assemble_phi(double x, const Spectrum& spec, const MimoConfig& cfg, Method method,
                       const CdfOptions& opts = {});
/// One matrix per x; HGM methods share one trajectory per entry across the grid.
std::vector<PhiMatrix> assemble_phi_grid(const std::vector<double>& xs, const Spectrum& spec, const MimoConfig& cfg,
                                         Method method, const CdfOptions& opts = {});

/// e^{-sum lambda} / (prod_{i<j} (lambda_i - lambda_j) ((t-s)!)^s).
ScaledReal log_prefactor(const Spectrum& spec, const MimoConfig& cfg);

/// Determinant by LU with partial pivoting on column- and row-normalized significands.
ScaledReal det_scaled(const std::vector<ScaledReal>& m, int s, Precision precision = Precision::double_double);

CdfResult cdf_largest_eig(double x, const Spectrum& spec, const MimoConfig& cfg, Method method,
                          const CdfOptions& opts = {});
/// CDF on a grid of x values (any order); results follow the input order.
std::vector<CdfResult> cdf_curve(const std::vector<double>& xs, const Spectrum& spec, const MimoConfig& cfg,
                                 Method method, const CdfOptions& opts = {});

/// Sample standard deviation of prefactor * det under i.i.d. uniform entry
/// perturbations in [-entry_errs, +entry_errs] (absolute magnitudes).
double error_estimate(const PhiMatrix& phi, const std::vector<double>& entry_errs_rel, const ScaledReal& prefactor,
                      int trials, std::uint64_t seed, Precision precision = Precision::double_double);
double error_estimate(const PhiMatrix& phi, const std::vector<ScaledReal>& entry_errs, const ScaledReal& prefactor,
                      int trials, std::uint64_t seed, Precision precision = Precision::double_double);

/// x = (K + 1) gamma_th / gamma_b.
double outage_threshold(const MimoConfig& cfg);
CdfResult outage_probability(const Spectrum& spec, const MimoConfig& cfg, Method method, const CdfOptions& opts = {});

/// Shape rescaled so that sum lambda = K n_t n_r.
Spectrum spectrum_from_k(const std::vector<double>& shape, double K, int n_t, int n_r);

double db_to_linear(double db);
double linear_to_db(double v);

}  // namespace whgm
