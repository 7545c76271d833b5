#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "langevin/bounds.hpp"
#include "langevin/errors.hpp"
#include "langevin/experiment.hpp"
#include "langevin/gaussian.hpp"
#include "transcriptions.hpp"

using namespace langevin;

namespace {

BoundConstants all_ones() {
  BoundConstants c;
  c.L1 = c.L2 = c.A0 = 1.0;
  c.mu = 1.0;
  c.beta = 1.0;
  c.sigma0 = c.h0 = c.entropy0 = 1.0;
  c.f0 = 1.0;
  return c;
}

LinearDrift ou1() { return {-Matrix::Identity(1, 1), Vector::Zero(1)}; }

double fourth_moment_1d(const GaussianMoments& m) {
  const double mu = m.mean(0), s = m.cov(0, 0);
  return mu * mu * mu * mu + 6.0 * mu * mu * s + 3.0 * s * s;
}

}  // namespace

TEST(DissipativeBound, AllOnesWorkedValue) {
  const auto b = kl_bound_thm1_terms(all_ones(), 0.1, 1.0, 1);
  EXPECT_NEAR(b.total, 0.1007, 1e-15);
  ASSERT_EQ(b.top_level.size(), 2u);
  EXPECT_NEAR(b.top_level[0].value, 0.1, 1e-15);
  EXPECT_NEAR(b.top_level[1].value, 0.0007, 1e-15);
}

TEST(DissipativeBound, MatchesSecondTranscription) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 200; ++i) {
    BoundConstants c;
    c.L1 = u(rng);
    c.L2 = u(rng);
    c.A0 = u(rng);
    c.mu = u(rng);
    c.beta = u(rng);
    c.sigma0 = u(rng);
    c.h0 = u(rng);
    c.entropy0 = u(rng);
    c.c0 = u(rng);
    c.c1 = u(rng);
    const double eta = 0.4 / c.L1 * u(rng) / 3.0, T = u(rng);
    const int d = 1 + i % 8;
    const double ours = kl_bound_thm1(c, eta, T, d);
    const double flat = test::thm1_flat(c.L1, c.L2, c.A0, *c.mu, *c.beta, c.sigma0, c.h0, c.entropy0, c.c0,
                                  c.c1, eta, T, d);
    EXPECT_NEAR(ours, flat, 1e-12 * std::max(1.0, flat));
  }
}

TEST(DissipativeBound, ScalingAndMonotonicity) {
  const auto c = all_ones();
  EXPECT_NEAR(kl_bound_thm1(c, 2e-4, 1.0, 1) / kl_bound_thm1(c, 1e-4, 1.0, 1), 4.0, 1e-6);
  EXPECT_LT(kl_bound_thm1(c, 1e-8, 1.0, 1), 1e-14);
  EXPECT_GT(kl_bound_thm1(c, 0.1, 2.0, 1), kl_bound_thm1(c, 0.1, 1.0, 1));
  // bound / eta^2 tends to the c0 coefficient sum: 1+1+1+(1+2)(1+1)+1 = 10.
  EXPECT_NEAR(kl_bound_thm1(c, 1e-6, 1.0, 1) / 1e-12, 10.0, 1e-6);
  double prev = 0.0;
  for (double eta = 0.01; eta < 0.5; eta += 0.01) {
    const double v = kl_bound_thm1(c, eta, 1.0, 1);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(DissipativeBound, Errors) {
  auto c = all_ones();
  c.mu.reset();
  c.beta.reset();
  try {
    kl_bound_thm1(c, 0.1, 1.0, 1);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("mu"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
  }
  EXPECT_THROW(kl_bound_thm1(all_ones(), 0.5, 1.0, 1), InputError);
  EXPECT_THROW(kl_bound_thm1(all_ones(), 0.0, 1.0, 1), InputError);
}

TEST(GradientDriftBound, AllOnesMatchesSecondTranscription) {
  const double v = kl_bound_thm2(all_ones(), 0.1, 1.0, 1);
  EXPECT_NEAR(v, test::thm2_flat(1, 1, 1, 1, 1, 1, 1, 1, 1, 0.1, 1.0, 1.0), 1e-12);
  // 0.01 (1 + (1 + 1 + 3) 2 + 1) + 1e-4 (1 + 1 + 4 + 1)
  EXPECT_NEAR(v, 0.1207, 1e-15);
}

TEST(GradientDriftBound, MatchesSecondTranscriptionRandom) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 200; ++i) {
    BoundConstants c;
    c.L1 = u(rng);
    c.L2 = u(rng);
    c.A0 = u(rng);
    c.f0 = u(rng);
    c.sigma0 = u(rng);
    c.h0 = u(rng);
    c.entropy0 = u(rng);
    c.c0 = u(rng);
    c.c1 = u(rng);
    const double eta = 0.4 / c.L1 * u(rng) / 3.0, T = u(rng);
    const int d = 1 + i % 8;
    const double flat =
        test::thm2_flat(c.L1, c.L2, c.A0, *c.f0, c.sigma0, c.h0, c.entropy0, c.c0, c.c1, eta, T, d);
    EXPECT_NEAR(kl_bound_thm2(c, eta, T, d), flat, 1e-12 * std::max(1.0, flat));
  }
}

TEST(GradientDriftBound, ScalingAndErrors) {
  const auto c = all_ones();
  EXPECT_NEAR(kl_bound_thm2(c, 2e-4, 1.0, 1) / kl_bound_thm2(c, 1e-4, 1.0, 1), 4.0, 1e-6);
  for (double T : {1.0, 2.0, 5.0}) EXPECT_GT(kl_bound_thm2(c, 0.1, 2 * T, 1), 2 * kl_bound_thm2(c, 0.1, T, 1));
  auto missing = c;
  missing.f0.reset();
  try {
    kl_bound_thm2(missing, 0.1, 1.0, 1);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f0"), std::string::npos);
  }
}

TEST(Bounds, RateAgreementWithExactOu) {
  const auto model = make_ou(1);
  const InitDensity init{Vector::Ones(1), 1.0};
  const BoundConstants c = derive_constants(*model, init);
  double lo = 1e300, hi = 0.0;
  for (double eta : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
    const double ratio = exact_discretization_kl(*model, init, eta, 2.0) / kl_bound_thm1(c, eta, 2.0, 1);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  EXPECT_LT(hi, 1.0);
  EXPECT_LT(hi / lo, 2.0);
}

TEST(KlDerivativeBound, Examples) {
  BoundConstants c;
  c.L1 = 1.0;
  c.L2 = 0.0;
  EXPECT_EQ(prop1_rhs(c, 0.0, 0.1, 1, 3.0, 5.0), 0.0);
  EXPECT_NEAR(prop1_rhs(c, 0.1, 0.1, 1, 1.0, 0.0), 0.052, 1e-15);
  EXPECT_THROW(prop1_rhs(c, 0.2, 0.1, 1, 1.0, 0.0), InputError);
}

TEST(KlDerivativeBound, UpperBoundsExactOneStepIncrements) {
  BoundConstants c;
  c.L1 = 1.0;
  c.L2 = 0.0;
  c.A0 = 0.0;
  const auto init = GaussianMoments::isotropic(Vector::Ones(1), 1.0);
  for (double eta : {0.05, 0.025, 0.01}) {
    for (int k = 0; k < 100; k += 7) {
      const auto grid_k = em_moments_linear(ou1(), init, eta, k);
      const auto grid_k1 = em_moments_linear(ou1(), grid_k, eta, 1);
      const auto cont_k = continuous_moments_linear(ou1(), init, k * eta);
      const auto cont_k1 = continuous_moments_linear(ou1(), init, (k + 1) * eta);
      const double increment = kl_gaussian(grid_k1, cont_k1) - kl_gaussian(grid_k, cont_k);
      const double fisher = fisher_info_gaussian(grid_k), m4 = fourth_moment_1d(grid_k);
      // Simpson in tau over one step.
      const int panels = 64;
      double integral = 0.0;
      for (int i = 0; i <= panels; ++i) {
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        integral += w * prop1_rhs(c, eta * i / panels, eta, 1, fisher, m4);
      }
      integral *= eta / panels / 3.0;
      EXPECT_LE(increment, integral) << eta << " " << k;
    }
  }
}

TEST(FisherAverageBound, Examples) {
  BoundConstants c;
  c.L1 = 3.0;
  c.L2 = 0.0;
  c.A0 = 0.0;
  c.h0 = 0.7;
  c.entropy0 = 1.3;
  EXPECT_NEAR(fisher_rhs_prop2(c, 1.0, 0.0, 0.0, 0.1, 1), 32 * 0.7 + 1.3, 1e-12);
  c.L2 = 2.0;
  const double base = fisher_rhs_prop2(c, 1.0, 0.5, 0.5, 0.1, 2);
  const double twice = fisher_rhs_prop2(c, 1.0, 0.5, 0.5, 0.2, 2);
  EXPECT_NEAR(twice - base, 3.0 * 32 * 0.01 * 4 * 4 * 1.0, 1e-10);
  EXPECT_THROW(fisher_rhs_prop2(c, 1.05, 0.0, 0.0, 0.1, 1), InputError);
}

TEST(FisherAverageBound, DominatesExactAverageFisher) {
  const auto model = make_ou(1);
  for (double m0 : {0.0, 1.0, 3.0}) {
    for (double s0 : {0.3, 1.0, 2.0}) {
      const InitDensity init{Vector::Constant(1, m0), s0};
      const BoundConstants c = derive_constants(*model, init);
      for (double eta : {0.1, 0.05, 0.02}) {
        for (double T : {1.0, 5.0, 10.0}) {
          const auto N = static_cast<int>(std::lround(T / eta));
          GaussianMoments m = GaussianMoments::isotropic(init.mean, s0 * s0);
          double fisher = 0.0, sup = 0.0, integral = 0.0;
          for (int k = 0; k < N; ++k) {
            fisher += fisher_info_gaussian(m);
            const double m2 = m.mean.squaredNorm() + m.cov.trace();
            sup = std::max(sup, m2);
            integral += eta * m2;
            m = em_moments_linear(ou1(), m, eta, 1);
          }
          EXPECT_GE(fisher_rhs_prop2(c, T, sup, integral, eta, 1), fisher / N);
        }
      }
    }
  }
}

TEST(StepSize, Examples) {
  EXPECT_NEAR(step_size_corollary(0.01, 0.5, 2), std::sqrt(0.005) / (2 * std::log(2.0)), 1e-15);
  EXPECT_NEAR(step_size_corollary(0.01, 0.5, 2), 0.05101, 1e-5);
  EXPECT_NEAR(step_size_corollary(0.04, 0.5, 2) / step_size_corollary(0.01, 0.5, 2), 2.0, 1e-12);
  EXPECT_NEAR(step_size_corollary(0.01, 0.5, 4) / step_size_corollary(0.01, 0.5, 2), 0.5, 1e-12);
  EXPECT_THROW(step_size_corollary(0.01, 1.0, 1), ConfigError);
  EXPECT_THROW(step_size_corollary(0.01, 2.0, 1), ConfigError);
  EXPECT_THROW(step_size_corollary(0.0, 0.5, 1), InputError);
}

TEST(MixingPredict, Ratios) {
  const double kl = mixing_time_predict(0.01, 0.5, 2, MixingMetric::kKL).steps;
  EXPECT_NEAR(mixing_time_predict(0.0025, 0.5, 2, MixingMetric::kKL).steps / kl, 2.0, 1e-12);
  EXPECT_NEAR(mixing_time_predict(0.01, 0.5, 4, MixingMetric::kTV).steps /
                  mixing_time_predict(0.01, 0.5, 2, MixingMetric::kTV).steps,
              2.0, 1e-12);
  EXPECT_NEAR(mixing_time_predict(0.01, 0.3, 2, MixingMetric::kW2).steps /
                  mixing_time_predict(0.01, 0.3, 2, MixingMetric::kTV).steps,
              1.0 / 0.3, 1e-12);
  const auto p = mixing_time_predict(0.01, 0.5, 1, MixingMetric::kW1, 3.0);
  EXPECT_NEAR(p.steps, 3.0 * 100 * std::pow(0.5, -1.5), 1e-9);
  EXPECT_NEAR(p.log_annotation, std::log(100.0) * std::log(2.0), 1e-12);
  EXPECT_THROW(parse_metric("KS"), InputError);
  EXPECT_EQ(parse_metric("w2"), MixingMetric::kW2);
}

TEST(MomentBound, ExampleAndMonotonicity) {
  EXPECT_NEAR(moment_bound_lemma9(1, 2, 1, 1, 1), std::sqrt(2.0) + 2.0, 1e-15);
  const double base = moment_bound_lemma9(1, 2, 2, 1, 1);
  EXPECT_GT(moment_bound_lemma9(1, 4, 2, 1, 1), base);
  EXPECT_GT(moment_bound_lemma9(1, 2, 3, 1, 1), base);
  EXPECT_GT(moment_bound_lemma9(1, 2, 2, 1, 2), base);
  EXPECT_LT(moment_bound_lemma9(1, 2, 2, 2, 1), base);
  EXPECT_THROW(moment_bound_lemma9(1, 0.5, 1, 1, 1), InputError);
}

TEST(MomentBound, OuEnsemblesStayBelowScaledBound) {
  const auto ou = make_ou(1);
  SimulationOptions opts;
  for (double t = 5.0; t <= 50.0; t += 5.0) opts.snapshot_times.push_back(t);
  const InitDensity init{Vector::Zero(1), 1.0};
  const auto r = simulate_ensemble(*ou, init, 0.05, 50.0, 5000, 1, opts);
  for (const auto& snap : r.snapshots) {
    for (int p : {1, 2, 4}) {
      const double root = std::pow(moment_estimate(snap, p), 1.0 / p);
      EXPECT_LT(root, moment_bound_lemma9(1.0, p, 1, 1.0, 0.0, 10.0)) << snap.time << " " << p;
    }
  }
}

TEST(BoundConstants, Validate) {
  auto c = all_ones();
  EXPECT_NO_THROW(c.validate());
  c.c0 = 0.0;
  EXPECT_THROW(c.validate(), InputError);
  c = all_ones();
  c.L1 = std::nan("");
  EXPECT_THROW(c.validate(), InputError);
}
