#include "langevin/bounds.hpp"

#include <cmath>
#include <sstream>

#include "langevin/errors.hpp"

namespace langevin {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw InputError(std::string("bound constant ") + name + " is not finite");
}

void check_window(const BoundConstants& c, double eta) {
  if (!(eta > 0.0)) throw InputError("eta must be positive");
  if (c.L1 > 0.0 && !(eta < 1.0 / (2.0 * c.L1))) {
    std::ostringstream msg;
    msg << "eta = " << eta << " outside (0, 1/(2 L1)) = (0, " << 1.0 / (2.0 * c.L1) << ")";
    throw InputError(msg.str());
  }
}

void check_common(double horizon, int dim) {
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  if (dim < 1) throw InputError("dimension must be at least 1");
}

void check_rho(double rho) {
  if (!(rho > 0.0)) throw InputError("log-Sobolev constant rho must be positive");
  if (rho >= 1.0) {
    throw ConfigError(
        "rho >= 1 makes log(1/rho) <= 0 in the step-size rule; supply eta directly");
  }
}

}  // namespace

void BoundConstants::validate() const {
  require_finite(L1, "L1");
  require_finite(L2, "L2");
  require_finite(A0, "A0");
  require_finite(sigma0, "sigma0");
  require_finite(h0, "h0");
  require_finite(entropy0, "entropy0");
  require_finite(c0, "c0");
  require_finite(c1, "c1");
  if (L1 < 0.0 || L2 < 0.0 || A0 < 0.0) throw InputError("L1, L2, A0 must be nonnegative");
  if (!(sigma0 > 0.0)) throw InputError("sigma0 must be positive");
  if (!(c0 > 0.0) || !(c1 > 0.0)) throw InputError("c0 and c1 must be positive");
  if (mu) require_finite(*mu, "mu");
  if (beta) require_finite(*beta, "beta");
  if (rho) require_finite(*rho, "rho");
  if (f0) require_finite(*f0, "f0");
}

BoundBreakdown kl_bound_thm1_terms(const BoundConstants& c, double eta, double horizon, int dim) {
  c.validate();
  std::string missing;
  if (!c.mu) missing += " mu";
  if (!c.beta) missing += " beta";
  if (!missing.empty()) throw ConfigError("kl_bound_thm1 needs constants:" + missing);
  if (!(*c.mu > 0.0)) throw InputError("mu must be positive");
  check_window(c, eta);
  check_common(horizon, dim);

  const double d = dim, T = horizon, mu = *c.mu, beta = *c.beta;
  const double s2 = c.sigma0 * c.sigma0;
  const double L1_2 = c.L1 * c.L1, L2_2 = c.L2 * c.L2;
  const double eta2 = eta * eta;

  BoundBreakdown out;
  const double moment = s2 * d + (beta + d) / mu;
  const double growth = 1.0 / s2 + T * L1_2;
  out.inner = {
      {"h0", c.h0},
      {"entropy0", c.entropy0},
      {"A0^2", c.A0 * c.A0},
      {"(sigma0^2 d + (beta+d)/mu)(sigma0^-2 + T L1^2)", moment * growth},
      {"T L2^2 d^2", T * L2_2 * d * d},
  };
  double first = 0.0;
  for (const auto& t : out.inner) first += t.value;

  const double A0_4 = std::pow(c.A0, 4);
  const double tail = s2 * d + (beta + d) * (beta + d) / mu + d * d;
  out.inner.push_back({"A0^4", A0_4});
  out.inner.push_back({"L1^4 (sigma0^2 d + (beta+d)^2/mu + d^2)", L1_2 * L1_2 * tail});
  const double second = A0_4 + L1_2 * L1_2 * tail;

  out.top_level = {{"c0 eta^2 (...)", c.c0 * eta2 * first},
                   {"c1 eta^4 L2^2 (...)", c.c1 * eta2 * eta2 * L2_2 * second}};
  out.total = out.top_level[0].value + out.top_level[1].value;
  return out;
}

double kl_bound_thm1(const BoundConstants& c, double eta, double horizon, int dim) {
  return kl_bound_thm1_terms(c, eta, horizon, dim).total;
}

BoundBreakdown kl_bound_thm2_terms(const BoundConstants& c, double eta, double horizon, int dim) {
  c.validate();
  if (!c.f0) throw ConfigError("kl_bound_thm2 needs constants: f0");
  if (*c.f0 < 0.0) throw InputError("f0 must be nonnegative");
  check_window(c, eta);
  check_common(horizon, dim);

  const double d = dim, T = horizon, f0 = *c.f0;
  const double s2 = c.sigma0 * c.sigma0;
  const double L1_2 = c.L1 * c.L1, L2_2 = c.L2 * c.L2;
  const double eta2 = eta * eta;

  BoundBreakdown out;
  const double moment = s2 * d + f0 + c.L1 * T * s2 * (c.h0 + c.entropy0 + d);
  const double growth = 1.0 / s2 + T * L1_2;
  out.inner = {
      {"A0^2", c.A0 * c.A0},
      {"(sigma0^2 d + f0 + L1 T sigma0^2 (h0 + H + d))(sigma0^-2 + T L1^2)", moment * growth},
      {"T L2^2 d^2", T * L2_2 * d * d},
  };
  double first = 0.0;
  for (const auto& t : out.inner) first += t.value;

  const double A0_4 = std::pow(c.A0, 4);
  const double tail = f0 * f0 + L1_2 * T * T * s2 * s2 * (c.h0 + d) * (c.h0 + d) +
                      L1_2 * std::pow(T, 4) * d * d;
  out.inner.push_back({"A0^4", A0_4});
  out.inner.push_back({"L1^4 (f0^2 + L1^2 T^2 sigma0^4 (h0+d)^2 + L1^2 T^4 d^2)", L1_2 * L1_2 * tail});
  const double second = A0_4 + L1_2 * L1_2 * tail;

  out.top_level = {{"c0 eta^2 (...)", c.c0 * eta2 * first},
                   {"c1 eta^4 L2^2 (...)", c.c1 * eta2 * eta2 * L2_2 * second}};
  out.total = out.top_level[0].value + out.top_level[1].value;
  return out;
}

double kl_bound_thm2(const BoundConstants& c, double eta, double horizon, int dim) {
  return kl_bound_thm2_terms(c, eta, horizon, dim).total;
}

double prop1_rhs(const BoundConstants& c, double tau, double eta, int dim,
                 double fisher_prev, double fourth_moment_prev) {
  if (!(tau >= 0.0 && tau <= eta)) throw InputError("prop1_rhs: offset outside [0, eta]");
  if (dim < 1) throw InputError("dimension must be at least 1");
  const double d = dim;
  const double L1_2 = c.L1 * c.L1, L2_2 = c.L2 * c.L2;
  const double t2 = tau * tau;
  return 4.0 * L1_2 * t2 * fisher_prev + 12.0 * L1_2 * L1_2 * t2 * tau * d +
         16.0 * t2 * t2 * L2_2 * (std::pow(c.A0, 4) + L1_2 * L1_2 * fourth_moment_prev) +
         48.0 * t2 * L2_2 * d * d;
}

double fisher_rhs_prop2(const BoundConstants& c, double horizon, double second_moment_sup,
                        double second_moment_integral, double eta, int dim) {
  if (!(eta > 0.0)) throw InputError("eta must be positive");
  const double steps = horizon / eta;
  if (!(steps >= 1.0 - 1e-9) || std::abs(steps - std::round(steps)) > 1e-6 * steps) {
    throw InputError("fisher_rhs_prop2: horizon must be a positive multiple of eta");
  }
  const double d = dim, T = horizon;
  return (32.0 * c.h0 + 128.0 * c.A0 * c.A0 * T + c.entropy0) +
         32.0 / (c.sigma0 * c.sigma0) * second_moment_sup +
         128.0 * c.L1 * c.L1 * second_moment_integral + 32.0 * eta * eta * d * d * c.L2 * c.L2 * T;
}

double step_size_corollary(double eps, double rho, int dim) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  if (dim < 1) throw InputError("dimension must be at least 1");
  check_rho(rho);
  return std::sqrt(eps * rho) / (static_cast<double>(dim) * std::log(1.0 / rho));
}

MixingMetric parse_metric(std::string_view name) {
  if (name == "KL" || name == "kl") return MixingMetric::kKL;
  if (name == "TV" || name == "tv") return MixingMetric::kTV;
  if (name == "W2" || name == "w2") return MixingMetric::kW2;
  if (name == "W1" || name == "w1") return MixingMetric::kW1;
  throw InputError("unknown metric: " + std::string(name));
}

std::string metric_name(MixingMetric metric) {
  switch (metric) {
    case MixingMetric::kKL: return "KL";
    case MixingMetric::kTV: return "TV";
    case MixingMetric::kW2: return "W2";
    case MixingMetric::kW1: return "W1";
  }
  return "?";
}

MixingPrediction mixing_time_predict(double eps, double rho, int dim, MixingMetric metric,
                                     double scale_constant) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  if (dim < 1) throw InputError("dimension must be at least 1");
  if (!(scale_constant > 0.0)) throw InputError("scale constant must be positive");
  check_rho(rho);
  const double d = dim;
  double order = 0.0;
  switch (metric) {
    case MixingMetric::kKL: order = std::pow(eps, -0.5) * d * std::pow(rho, -1.5); break;
    case MixingMetric::kTV: order = d / eps * std::pow(rho, -1.5); break;
    case MixingMetric::kW2: order = d / eps * std::pow(rho, -2.5); break;
    case MixingMetric::kW1: order = std::pow(d, 1.5) / eps * std::pow(rho, -1.5); break;
  }
  return {scale_constant * order, std::log(1.0 / eps) * std::log(1.0 / rho)};
}

double moment_bound_lemma9(double sigma0, double p, int dim, double mu, double beta,
                           double scale_constant) {
  if (!(p >= 1.0)) throw InputError("moment order must be >= 1");
  if (!(mu > 0.0) || !(beta >= 0.0)) throw InputError("need mu > 0 and beta >= 0");
  if (dim < 1) throw InputError("dimension must be at least 1");
  const double d = dim;
  return scale_constant * (sigma0 * std::sqrt(p * d) + std::sqrt((p + beta + d) / mu));
}

}  // namespace langevin
