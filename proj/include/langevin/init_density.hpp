#pragma once

#include <Eigen/Dense>

namespace langevin {

/// Isotropic Gaussian initialization N(mean, sigma^2 I).
struct InitDensity {
  Eigen::VectorXd mean;
  double sigma = 1.0;

  int dim() const { return static_cast<int>(mean.size()); }

  /// -log pi0(x).
  double neg_log_density(const Eigen::VectorXd& x) const;
  /// Differential entropy H(pi0) = (d/2)(1 + log 2 pi) + d log sigma.
  double entropy() const;
};

}  // namespace langevin
