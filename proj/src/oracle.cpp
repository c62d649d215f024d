#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "errors.hpp"
#include "parallel.hpp"

namespace whgm {

namespace {

constexpr long kBatch = 4096;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform on (0, 1], 53 bits.
double unit_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

// Box-Muller pair of independent N(0, 1/2) variates.
std::complex<double> complex_gaussian(std::mt19937_64& rng) {
  const double u1 = unit_open(rng);
  const double u2 = unit_open(rng);
  const double r = std::sqrt(-std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

void check_model(const Spectrum& spec, const MimoConfig& cfg) {
  spec.validate();
  cfg.validate();
  require(static_cast<int>(spec.size()) == cfg.s(), ErrorCode::invalid_model,
          "spectrum size must equal min(n_t, n_r)");
}

}  // namespace

double McEstimate::z_score(double value) const {
  const double se = std::max(std_err, 1.0 / static_cast<double>(std::max(n_samples, 1L)));
  return (value - p_hat) / se;
}

const char* rng_description() { return "mt19937_64, splitmix64 batch seeds, Box-Muller"; }

CMatrix mean_matrix_from_spectrum(const Spectrum& spec, const MimoConfig& cfg) {
  check_model(spec, cfg);
  CMatrix Hd = CMatrix::Zero(cfg.n_r, cfg.n_t);
  for (int j = 0; j < cfg.s(); ++j) Hd(j, j) = std::sqrt(spec.lambdas[static_cast<std::size_t>(j)] / (cfg.K + 1.0));
  return Hd;
}

ChannelSample sample_channel(const MimoConfig& cfg, const CMatrix& Hd, std::mt19937_64& rng) {
  const double sc = 1.0 / std::sqrt(cfg.K + 1.0);
  ChannelSample out{CMatrix(cfg.n_r, cfg.n_t)};
  for (int c = 0; c < cfg.n_t; ++c)
    for (int r = 0; r < cfg.n_r; ++r) out.H(r, c) = Hd(r, c) + sc * complex_gaussian(rng);
  return out;
}

double largest_eig_gram(const CMatrix& gram, const EigOptions& opts) {
  const Eigen::Index s = gram.rows();
  require(s >= 1 && gram.cols() == s, ErrorCode::invalid_argument, "Gram matrix must be square");
  if (s == 1) return gram(0, 0).real();
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(s) / std::sqrt(static_cast<double>(s));
  double prev = 0.0;
  for (long it = 0; it < opts.max_iter; ++it) {
    Eigen::VectorXcd w = gram * v;
    const double rq = v.dot(w).real();
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (it > 0 && std::fabs(rq - prev) < opts.tol * std::fabs(rq)) return rq;
    prev = rq;
  }
  require(s <= 8, ErrorCode::not_converged, "power iteration did not converge (near-degenerate top pair)");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(s - 1);
}

double largest_eig(const ChannelSample& sample, const MimoConfig& cfg, const EigOptions& opts) {
  const CMatrix& H = sample.H;
  const CMatrix gram = H.cols() <= H.rows() ? CMatrix(H.adjoint() * H) : CMatrix(H * H.adjoint());
  return (cfg.K + 1.0) * largest_eig_gram(gram, opts);
}

std::vector<double> sample_largest_eigs(const Spectrum& spec, const MimoConfig& cfg, long n_samples,
                                        std::uint64_t seed, int threads) {
  require(n_samples >= 1, ErrorCode::invalid_argument, "n_samples must be >= 1");
  const CMatrix Hd = mean_matrix_from_spectrum(spec, cfg);
  std::vector<double> eigs(static_cast<std::size_t>(n_samples));
  const long batches = (n_samples + kBatch - 1) / kBatch;
  parallel_for(static_cast<std::size_t>(batches), threads, [&](std::size_t b) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(b)));
    const long lo = static_cast<long>(b) * kBatch;
    const long hi = std::min(n_samples, lo + kBatch);
    for (long i = lo; i < hi; ++i) eigs[static_cast<std::size_t>(i)] = largest_eig(sample_channel(cfg, Hd, rng), cfg);
  });
  return eigs;
}

McEstimate estimate_from_eigs(double x, const std::vector<double>& eigs) {
  McEstimate e;
  e.n_samples = static_cast<long>(eigs.size());
  if (e.n_samples == 0) return e;
  const long hits = std::count_if(eigs.begin(), eigs.end(), [x](double v) { return v <= x; });
  e.p_hat = static_cast<double>(hits) / static_cast<double>(e.n_samples);
  e.std_err = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(e.n_samples));
  return e;
}

std::vector<McEstimate> empirical_cdf_grid(const std::vector<double>& xs, const Spectrum& spec, const MimoConfig& cfg,
                                           long n_samples, std::uint64_t seed, int threads) {
  require(n_samples >= 1000, ErrorCode::invalid_argument, "n_samples must be >= 1000");
  const auto eigs = sample_largest_eigs(spec, cfg, n_samples, seed, threads);
  std::vector<McEstimate> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(estimate_from_eigs(x, eigs));
  return out;
}

McEstimate empirical_cdf(double x, const Spectrum& spec, const MimoConfig& cfg, long n_samples, std::uint64_t seed,
                         int threads) {
  return empirical_cdf_grid({x}, spec, cfg, n_samples, seed, threads).front();
}

}  // namespace whgm
