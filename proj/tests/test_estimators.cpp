#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "langevin/errors.hpp"
#include "langevin/estimators.hpp"
#include "langevin/gaussian.hpp"
#include "test_util.hpp"

using namespace langevin;
using test::gaussian_points;

namespace {

PointMatrix column(std::initializer_list<double> values) {
  PointMatrix p(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) p(i++, 0) = v;
  return p;
}

// Analytic Girsanov quantity for an affine drift: the drift gap over an
// offset tau is -A (tau b(x) + sqrt(tau) xi), so its mean square is
// tau^2 E|A b(x)|^2 + tau tr(A^T A) with x from the EM oracle.
double girsanov_oracle(const Matrix& A, const Vector& c, const GaussianMoments& init, double eta,
                       std::uint64_t steps, int J) {
  const LinearDrift drift{A, c};
  const Matrix AA = A * A;
  double total = 0.0;
  GaussianMoments m = init;
  for (std::uint64_t k = 0; k < steps; ++k) {
    const Vector mean_ab = A * (A * m.mean + c);
    const double e_ab2 = mean_ab.squaredNorm() + (AA * m.cov * AA.transpose()).trace();
    for (int j = 0; j < J; ++j) {
      const double tau = (j + 0.5) * eta / J;
      total += eta / J * (tau * tau * e_ab2 + tau * (A.transpose() * A).trace());
    }
    m = em_moments_linear(drift, m, eta, 1);
  }
  return 0.5 * total;
}

}  // namespace

TEST(KnnKl, SameDistributionNearZero) {
  const auto p = gaussian_points(20000, 0.0, 1.0, 1);
  const auto q = gaussian_points(20000, 0.0, 1.0, 2);
  EXPECT_NEAR(knn_kl(p, q).value, 0.0, 0.05);
}

TEST(KnnKl, ShiftedGaussians) {
  const auto p = gaussian_points(20000, 0.0, 1.0, 3);
  const auto q = gaussian_points(20000, 1.0, 1.0, 4);
  EXPECT_NEAR(knn_kl(p, q, 5).value, 0.5, 0.08);

  Vector shift = Vector::Zero(2);
  shift(0) = 1.0;
  const auto p2 = gaussian_points(20000, Vector::Zero(2), 1.0, 5);
  const auto q2 = gaussian_points(20000, shift, 1.0, 6);
  EXPECT_NEAR(knn_kl(p2, q2, 5).value, 0.5, 0.08);
}

TEST(KnnKl, BiasBoundAndScaleSpread) {
  for (double var : {0.5, 2.0, 4.0}) {
    const auto p = gaussian_points(20000, 0.0, 1.0, 7);
    const auto q = gaussian_points(20000, 0.5, std::sqrt(var), 8);
    const double exact = kl_gaussian(GaussianMoments::isotropic(Vector::Zero(1), 1.0),
                                     GaussianMoments::isotropic(Vector::Constant(1, 0.5), var));
    const double est = knn_kl(p, q).value;
    EXPECT_GE(est, -0.1);
    if (exact >= 0.1) {
      EXPECT_NEAR(est, exact, 0.15 * exact) << var;
    }
  }
}

TEST(KnnKl, DuplicatesWarnAndPreconditions) {
  PointMatrix p = gaussian_points(200, 0.0, 1.0, 9);
  p.row(1) = p.row(0);
  p.row(2) = p.row(0);
  const auto q = gaussian_points(200, 0.0, 1.0, 10);
  const auto est = knn_kl(p, q, 1);
  EXPECT_GT(est.zero_distances, 0u);
  EXPECT_FALSE(est.warnings.empty());
  EXPECT_TRUE(std::isfinite(est.value));
  EXPECT_THROW(knn_kl(gaussian_points(50, 0.0, 1.0, 1), q), InputError);
  EXPECT_THROW(knn_kl(p, gaussian_points(200, Vector::Zero(2), 1.0, 1)), InputError);
  EXPECT_THROW(knn_kl(p, q, 0), InputError);
}

TEST(W2Empirical, Examples) {
  const auto p = gaussian_points(1000, 0.0, 1.0, 1);
  EXPECT_EQ(w2_empirical_1d(p, p), 0.0);
  EXPECT_EQ(w2_empirical_1d(column({0.0}), column({1.0})), 1.0);
  const auto a = gaussian_points(100000, 0.0, 1.0, 2);
  const auto b = gaussian_points(100000, 2.0, 1.0, 3);
  EXPECT_NEAR(w2_empirical_1d(a, b), 2.0, 0.02);
  EXPECT_THROW(w2_empirical_1d(gaussian_points(10, Vector::Zero(2), 1.0, 1),
                               gaussian_points(10, Vector::Zero(2), 1.0, 2)),
               UnsupportedError);
  EXPECT_THROW(w2_empirical_1d(column({0.0, 1.0}), column({1.0})), InputError);
}

TEST(W2Empirical, MetricOnRandomTriples) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = gaussian_points(300, 0.0, 1.0, 3 * s);
    const auto y = gaussian_points(300, 0.4, 1.5, 3 * s + 1);
    const auto z = gaussian_points(300, -0.2, 0.7, 3 * s + 2);
    EXPECT_EQ(w2_empirical_1d(x, y), w2_empirical_1d(y, x));
    EXPECT_LE(w2_empirical_1d(x, z), w2_empirical_1d(x, y) + w2_empirical_1d(y, z) + 1e-12);
  }
}

TEST(TvHistogram, Examples) {
  const auto p = gaussian_points(5000, 0.0, 1.0, 1);
  EXPECT_EQ(tv_histogram(p, p), 0.0);

  PointMatrix lo(1000, 1), hi(1000, 1);
  for (int i = 0; i < 1000; ++i) {
    lo(i, 0) = -10.0 + i / 1000.0;
    hi(i, 0) = 9.0 + i / 1000.0;
  }
  EXPECT_NEAR(tv_histogram(lo, hi), 1.0, 1e-12);

  const auto a = gaussian_points(100000, 0.0, 1.0, 2);
  const auto b = gaussian_points(100000, 1.0, 1.0, 3);
  EXPECT_NEAR(tv_histogram(a, b, 64), std::erf(0.5 / std::sqrt(2.0)), 0.02);

  EXPECT_THROW(tv_histogram(gaussian_points(10, Vector::Zero(3), 1.0, 1),
                            gaussian_points(10, Vector::Zero(3), 1.0, 2)),
               UnsupportedError);
}

TEST(TvHistogram, TwoDimensional) {
  Vector shift = Vector::Zero(2);
  shift(0) = 1.0;
  const auto a = gaussian_points(100000, Vector::Zero(2), 1.0, 4);
  const auto b = gaussian_points(100000, shift, 1.0, 5);
  // The second coordinate carries no signal; the 2D binning adds positive bias.
  const double tv = tv_histogram(a, b, 32);
  EXPECT_GT(tv, std::erf(0.5 / std::sqrt(2.0)) - 0.02);
  EXPECT_LT(tv, std::erf(0.5 / std::sqrt(2.0)) + 0.08);
}

TEST(MomentEstimate, Examples) {
  const auto p = gaussian_points(100000, 0.0, 1.0, 6);
  EXPECT_NEAR(moment_estimate(p, 2), 1.0, 0.02);
  EXPECT_NEAR(moment_estimate(p, 4), 3.0, 0.1);
  EXPECT_NEAR(moment_estimate(p, 1), std::sqrt(2.0 / M_PI), 0.01);
  const auto r = simulate_ensemble(*make_ou(1), {Vector::Zero(1), 1.0}, 0.1, 20.0, 100000, 7);
  EXPECT_NEAR(moment_estimate(r.final, 2), 1.0 / 1.9, 0.01);
  EXPECT_THROW(moment_estimate(p, 3), InputError);
}

TEST(RateFit, Examples) {
  auto fit = rate_fit({{0.1, 0.01}, {0.2, 0.04}, {0.4, 0.16}});
  EXPECT_NEAR(fit.slope, 2.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  fit = rate_fit({{0.1, 0.1}, {0.2, 0.2}, {0.4, 0.4}});
  EXPECT_NEAR(fit.slope, 1.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-12);
  EXPECT_THROW(rate_fit({{0.1, 0.1}, {0.2, 0.2}}), InputError);
  EXPECT_THROW(rate_fit({{0.1, 0.1}, {0.2, 0.0}, {0.4, 0.4}}), InputError);
  EXPECT_THROW(rate_fit({{-0.1, 0.1}, {0.2, 0.2}, {0.4, 0.4}}), InputError);
}

TEST(RateFit, ScaleInvariance) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<std::pair<double, double>> pts;
  for (double eta : {0.2, 0.1, 0.05, 0.025}) pts.emplace_back(eta, eta * eta * u(rng));
  const auto base = rate_fit(pts);
  EXPECT_GE(base.r_squared, 0.0);
  EXPECT_LE(base.r_squared, 1.0);
  auto scaled = pts;
  for (auto& [e, v] : scaled) {
    e *= 7.0;
    v *= 0.003;
  }
  const auto s = rate_fit(scaled);
  EXPECT_NEAR(s.slope, base.slope, 1e-12);
  EXPECT_NEAR(s.r_squared, base.r_squared, 1e-12);
}

TEST(Girsanov, ZeroDriftIsZero) {
  EXPECT_EQ(girsanov_pathwise_kl(*make_zero_drift(2), {Vector::Zero(2), 1.0}, 0.1, 1.0, 100, 1), 0.0);
}

TEST(Girsanov, MatchesAnalyticExpectation) {
  Matrix A(2, 2);
  A << -1.0, 0.2, 0.2, -0.6;
  Vector c(2);
  c << 0.3, 0.0;
  const auto model = make_linear_drift(A, c);
  const InitDensity init{Vector::Ones(2), 1.0};
  const double eta = 0.1;
  const double mc = girsanov_pathwise_kl(*model, init, eta, 1.0, 40000, 3);
  const double oracle =
      girsanov_oracle(A, c, GaussianMoments::isotropic(init.mean, 1.0), eta, 10, kDefaultQuadPoints);
  EXPECT_NEAR(mc, oracle, 0.02 * oracle);
}

TEST(Girsanov, SlopeOneOnOu) {
  const auto ou = make_ou(1);
  const InitDensity init{Vector::Ones(1), 1.0};
  std::vector<std::pair<double, double>> pts;
  for (double eta : {0.2, 0.1, 0.05, 0.025}) {
    pts.emplace_back(eta, girsanov_pathwise_kl(*ou, init, eta, 2.0, 20000, 4));
  }
  const auto fit = rate_fit(pts);
  EXPECT_GE(fit.slope, 0.85);
  EXPECT_LE(fit.slope, 1.15);
}

TEST(Girsanov, DeterministicLimitHasSlopeTwo) {
  const auto ou = make_ou(1);
  const InitDensity init{Vector::Ones(1), 1.0};
  GirsanovOptions opts;
  opts.zero_noise = true;
  std::vector<std::pair<double, double>> pts;
  for (double eta : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
    pts.emplace_back(eta, girsanov_pathwise_kl(*ou, init, eta, 2.0, 1000, 5, opts));
  }
  EXPECT_NEAR(rate_fit(pts).slope, 2.0, 0.1);
}

TEST(Girsanov, ThreadIndependent) {
  const auto gm = make_gauss_mix(2);
  GirsanovOptions one, three;
  three.threads = 3;
  const InitDensity init{Vector::Zero(2), 1.0};
  EXPECT_EQ(girsanov_pathwise_kl(*gm, init, 0.1, 1.0, 999, 2, one),
            girsanov_pathwise_kl(*gm, init, 0.1, 1.0, 999, 2, three));
}
