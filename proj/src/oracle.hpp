#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cdf.hpp"

namespace whgm {

using CMatrix = Eigen::MatrixXcd;

struct ChannelSample {
  /// n_r x n_t.
  CMatrix H;
};

struct McEstimate {
  double p_hat = 0.0;
  long n_samples = 0;
  /// sqrt(p_hat (1 - p_hat) / n).
  double std_err = 0.0;

  /// (value - p_hat) / std_err, with std_err floored at 1/n so that p_hat in {0, 1} stays finite.
  double z_score(double value) const;
};

/// Generator and Gaussian transform used by the sampler.
const char* rng_description();

/// n_r x n_t matrix with sqrt(lambda_j / (K + 1)) on the leading diagonal.
CMatrix mean_matrix_from_spectrum(const Spectrum& spec, const MimoConfig& cfg);

/// H = H_d + G / sqrt(K + 1), G standard complex circular Gaussian.
ChannelSample sample_channel(const MimoConfig& cfg, const CMatrix& Hd, std::mt19937_64& rng);

struct EigOptions {
  double tol = 1e-12;
  long max_iter = 100000;
};

/// Largest eigenvalue of (K + 1) H^H H by power iteration on the s x s Gram matrix.
/// Falls back to a dense Hermitian solve for s <= 8 when the iteration stalls.
double largest_eig(const ChannelSample& sample, const MimoConfig& cfg, const EigOptions& opts = {});
/// Same, on an explicit Hermitian positive semidefinite matrix.
double largest_eig_gram(const CMatrix& gram, const EigOptions& opts = {});

/// Largest eigenvalues of n_samples channel draws. Samples are drawn in fixed
/// batches with per-batch seeds, so the result does not depend on threads.
std::vector<double> sample_largest_eigs(const Spectrum& spec, const MimoConfig& cfg, long n_samples,
                                        std::uint64_t seed, int threads = 1);

McEstimate empirical_cdf(double x, const Spectrum& spec, const MimoConfig& cfg, long n_samples, std::uint64_t seed,
                         int threads = 1);
/// Every x evaluated on one sample set.
std::vector<McEstimate> empirical_cdf_grid(const std::vector<double>& xs, const Spectrum& spec, const MimoConfig& cfg,
                                           long n_samples, std::uint64_t seed, int threads = 1);
McEstimate estimate_from_eigs(double x, const std::vector<double>& eigs);

}  // namespace whgm
