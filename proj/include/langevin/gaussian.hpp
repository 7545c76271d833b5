#pragma once

// Exact Gaussian moment propagation for affine drifts, plus closed-form
// divergences between Gaussians. These are the analytic oracles every
// rate check is measured against.

#include <cstdint>

#include <Eigen/Dense>

namespace langevin {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct GaussianMoments {
  Vector mean;
  Matrix cov;

  int dim() const { return static_cast<int>(mean.size()); }

  /// Throws InputError unless cov is square, matches mean, is symmetric
  /// within 1e-12 and has a positive smallest eigenvalue.
  void validate() const;

  static GaussianMoments isotropic(const Vector& mean, double variance);
};

/// b(x) = A x + c.
struct LinearDrift {
  Matrix A;
  Vector c;

  int dim() const { return static_cast<int>(c.size()); }
  bool symmetric(double tol = 1e-12) const;
};

/// Exact marginal at time t of dX = (A X + c) dt + dB started from `init`.
/// Solved in the eigenbasis of A; singular A uses the integral form.
/// Throws UnsupportedError for non-symmetric A.
GaussianMoments continuous_moments_linear(const LinearDrift& drift,
                                          const GaussianMoments& init, double t);

/// RK4 integration of m' = A m + c, S' = A S + S A^T + I with at most `step`
/// per stage. Works for any A; oracle-grade, not closed form.
GaussianMoments continuous_moments_rk4(const LinearDrift& drift,
                                       const GaussianMoments& init, double t,
                                       double step);

/// k Euler-Maruyama steps of size eta applied to the moments.
GaussianMoments em_moments_linear(const LinearDrift& drift,
                                  const GaussianMoments& init, double eta,
                                  std::uint64_t k);

/// Moments of x + tau b(x) + sqrt(tau) xi for x ~ grid_moments, 0 <= tau <= eta.
GaussianMoments interp_moments_linear(const LinearDrift& drift,
                                      const GaussianMoments& grid_moments,
                                      double tau, double eta);

/// Stationary law of the continuous diffusion; A must be negative definite.
GaussianMoments stationary_moments(const LinearDrift& drift);

/// KL(p || q).
double kl_gaussian(const GaussianMoments& p, const GaussianMoments& q);

/// 2-Wasserstein (Bures) distance.
double w2_gaussian(const GaussianMoments& p, const GaussianMoments& q);

/// Total variation between two 1D Gaussians, from the density crossings.
double tv_gaussian_1d(const GaussianMoments& p, const GaussianMoments& q);

/// Fisher information tr(cov^{-1}).
double fisher_info_gaussian(const GaussianMoments& p);

/// Differential entropy (d/2)(1 + log 2 pi) + log det(cov)/2.
double entropy_gaussian(const GaussianMoments& p);

/// Symmetric PSD square root with eigenvalue floor 1e-14.
Matrix sqrtm_psd(const Matrix& m);

}  // namespace langevin
