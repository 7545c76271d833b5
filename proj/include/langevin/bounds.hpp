#pragma once

// Evaluators for the closed-form KL discretization bounds, the Fisher
// information and KL-derivative right-hand sides, the step-size rule and
// mixing-time orders for log-Sobolev targets, and the dissipative moment
// bound. The universal constants c0, c1 have no known values,
// so every absolute value here is shape-only.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace langevin {

struct BoundConstants {
  double L1 = 0.0;
  double L2 = 0.0;
  double A0 = 0.0;
  std::optional<double> mu;
  std::optional<double> beta;
  double sigma0 = 1.0;
  double h0 = 0.0;
  double entropy0 = 0.0;  // H(pi0)
  std::optional<double> rho;
  double c0 = 1.0;
  double c1 = 1.0;
  std::optional<double> f0;  // f(0) for gradient drifts b = -grad f, f >= 0

  /// Throws InputError if a required field is non-finite or c0/c1 <= 0.
  void validate() const;
};

/// One named additive piece of a bound.
struct BoundTerm {
  std::string name;
  double value = 0.0;
};

struct BoundBreakdown {
  double total = 0.0;
  /// The two top-level pieces: the c0 eta^2 (...) and c1 eta^4 (...) terms.
  std::vector<BoundTerm> top_level;
  /// Every inner summand before the c0 eta^2 / c1 eta^4 prefactors.
  std::vector<BoundTerm> inner;
};

/// KL bound under Lipschitz, smooth, dissipative drift with smooth init:
///   c0 eta^2 (h0 + H + A0^2 + (s^2 d + (beta + d)/mu)(1/s^2 + T L1^2) + T L2^2 d^2)
///   + c1 eta^4 L2^2 (A0^4 + L1^4 (s^2 d + (beta + d)^2/mu + d^2)).
/// Requires mu, beta and eta in (0, 1/(2 L1)).
double kl_bound_thm1(const BoundConstants& c, double eta, double horizon, int dim);
BoundBreakdown kl_bound_thm1_terms(const BoundConstants& c, double eta, double horizon, int dim);

/// KL bound for gradient drifts b = -grad f with f >= 0 (no dissipativity):
///   c0 eta^2 (A0^2 + (s^2 d + f0 + L1 T s^2 (h0 + H + d))(1/s^2 + T L1^2) + T L2^2 d^2)
///   + c1 eta^4 L2^2 (A0^4 + L1^4 (f0^2 + L1^2 T^2 s^4 (h0 + d)^2 + L1^2 T^4 d^2)).
/// Requires f0.
double kl_bound_thm2(const BoundConstants& c, double eta, double horizon, int dim);
BoundBreakdown kl_bound_thm2_terms(const BoundConstants& c, double eta, double horizon, int dim);

/// Upper bound on d/dt KL at in-step offset tau = t - k eta:
///   4 L1^2 tau^2 I_k + 12 L1^4 tau^3 d + 16 tau^4 L2^2 (A0^4 + L1^4 M4_k) + 48 tau^2 L2^2 d^2,
/// with I_k the Fisher information and M4_k = E|X|^4 at the grid point.
/// `eta` bounds the offset.
double prop1_rhs(const BoundConstants& c, double tau, double eta, int dim,
                 double fisher_prev, double fourth_moment_prev);

/// Bound on the grid-averaged Fisher information over T = N eta:
///   (32 h0 + 128 A0^2 T + H) + 32 s^-2 sup E|X|^2 + 128 L1^2 int E|X|^2 + 32 eta^2 d^2 L2^2 T.
double fisher_rhs_prop2(const BoundConstants& c, double horizon, double second_moment_sup,
                        double second_moment_integral, double eta, int dim);

/// eta = sqrt(eps rho) / (d log(1/rho)). Throws ConfigError for rho >= 1
/// (supply eta directly instead) and InputError for eps <= 0, d < 1.
double step_size_corollary(double eps, double rho, int dim);

enum class MixingMetric { kKL, kTV, kW2, kW1 };

MixingMetric parse_metric(std::string_view name);
std::string metric_name(MixingMetric metric);

struct MixingPrediction {
  /// scale_constant x the polynomial order in (eps, d, rho).
  double steps = 0.0;
  /// log(1/eps) log(1/rho): the hidden logarithmic factor, reported
  /// separately and never multiplied in.
  double log_annotation = 0.0;
};

/// KL: eps^-1/2 d rho^-3/2; TV: d eps^-1 rho^-3/2; W2: d eps^-1 rho^-5/2;
/// W1: d^3/2 eps^-1 rho^-3/2.
MixingPrediction mixing_time_predict(double eps, double rho, int dim, MixingMetric metric,
                                     double scale_constant = 1.0);

/// scale (s sqrt(p d) + sqrt((p + beta + d) / mu)), a bound on
/// sup_t (E|X_t|^p)^{1/p} under dissipativity.
double moment_bound_lemma9(double sigma0, double p, int dim, double mu, double beta,
                           double scale_constant = 1.0);

}  // namespace langevin
