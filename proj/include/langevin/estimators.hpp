#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "langevin/drift_models.hpp"
#include "langevin/init_density.hpp"
#include "langevin/samplers.hpp"

namespace langevin {

/// Least-squares fit of log(value) against log(eta).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
};

struct KnnKlEstimate {
  double value = 0.0;
  std::size_t zero_distances = 0;  // distances replaced by the jitter floor
  std::vector<std::string> warnings;
};

inline constexpr int kDefaultKnnK = 5;
inline constexpr double kKnnJitter = 1e-12;
inline constexpr int kDefaultTvBins = 64;
inline constexpr int kDefaultQuadPoints = 4;

/// Two-sample k-NN divergence estimate of KL(p || q):
///   (d/n) sum_i log(nu_k(i) / rho_k(i)) + log(m / (n - 1)),
/// rho_k within p (self excluded), nu_k from p_i into q. Zero distances are
/// floored at kKnnJitter and reported as a warning. May be slightly negative.
KnnKlEstimate knn_kl(const PointMatrix& p, const PointMatrix& q, int k = kDefaultKnnK);
KnnKlEstimate knn_kl(const SampleEnsemble& p, const SampleEnsemble& q, int k = kDefaultKnnK);

/// Exact empirical W2 in 1D: quantile coupling of the sorted samples.
double w2_empirical_1d(const PointMatrix& p, const PointMatrix& q);
double w2_empirical_1d(const SampleEnsemble& p, const SampleEnsemble& q);

/// Histogram total variation, dim <= 2. Bins span the pooled [min, max]
/// per axis, clipped to 6 pooled standard deviations around the pooled
/// mean; out-of-range points land in the edge bins.
double tv_histogram(const PointMatrix& p, const PointMatrix& q, int bins_per_dim = kDefaultTvBins);
double tv_histogram(const SampleEnsemble& p, const SampleEnsemble& q,
                    int bins_per_dim = kDefaultTvBins);

/// (1/n) sum_i |x_i|^order for order in {1, 2, 4}.
double moment_estimate(const PointMatrix& samples, int order);
double moment_estimate(const SampleEnsemble& samples, int order);

RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

struct GirsanovOptions {
  int quad_points_per_step = kDefaultQuadPoints;
  int threads = 1;
  /// Drop every Brownian increment after initialization (deterministic limit).
  bool zero_noise = false;
};

/// Monte Carlo estimate of
///   1/2 sum_k sum_j w_j E |b(X_{k eta}) - b(X_{k eta + tau_j})|^2
/// with midpoint nodes tau_j = (j + 1/2) eta / J and weights eta / J, the
/// within-step points drawn by interpolated_sample.
double girsanov_pathwise_kl(const DriftModel& model, const InitDensity& init, double eta,
                            double horizon, std::uint64_t chains, std::uint64_t master_seed,
                            const GirsanovOptions& options = {});

}  // namespace langevin
