#include <gtest/gtest.h>

#include <cmath>

#include "langevin/drift_models.hpp"
#include "langevin/errors.hpp"

using namespace langevin;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

std::vector<double> radius_grid(double outer, int shells) {
  std::vector<double> r;
  for (int i = 1; i <= shells; ++i) r.push_back(outer * i / shells);
  return r;
}

std::vector<DriftModelPtr> builtins() {
  return {make_zero_drift(2), make_ou(1), make_ou(3, 0.7), make_double_well(1),
          make_double_well(2), make_gauss_mix(2), make_gauss_mix(1, 2.0)};
}

}  // namespace

TEST(DriftEval, Examples) {
  EXPECT_DOUBLE_EQ(make_ou(1)->eval(v1(1.0))(0), -1.0);
  EXPECT_DOUBLE_EQ(make_double_well(1)->eval(v1(2.0))(0), -3.0);
  for (const auto& m : builtins()) {
    EXPECT_NEAR(m->eval(Vector::Zero(m->dim())).norm(), m->constants().A0, 1e-15) << m->name();
  }
  Matrix A(2, 2);
  A << -1.0, 0.2, 0.2, -2.0;
  const Vector c = Vector::Constant(2, 3.0);
  EXPECT_NEAR(make_linear_drift(A, c)->eval(Vector::Zero(2)).norm(), std::sqrt(18.0), 1e-15);
}

TEST(DriftEval, Errors) {
  EXPECT_THROW(make_ou(2)->eval(v1(1.0)), InputError);
  EXPECT_THROW(make_ou(1)->jacobian(Vector::Zero(3)), InputError);
  EXPECT_THROW(make_double_well(1)->eval(v1(std::nan(""))), ModelError);
  Matrix A(2, 2);
  A << -1.0, 0.5, 0.0, -1.0;
  EXPECT_THROW(make_linear_drift(A, Vector::Zero(2)), UnsupportedError);
}

TEST(DriftJacobian, Examples) {
  EXPECT_TRUE(make_ou(3)->jacobian(Vector::Random(3)).isApprox(-Matrix::Identity(3, 3)));
  EXPECT_DOUBLE_EQ(make_double_well(1)->jacobian(v1(2.0))(0, 0), -5.5);
  EXPECT_EQ(make_zero_drift(2)->jacobian(Vector::Ones(2)), Matrix::Zero(2, 2));
}

TEST(GradCheck, Examples) {
  EXPECT_LT(grad_check(*make_ou(1), v1(0.3), 1e-5), 1e-9);
  EXPECT_LT(grad_check(*make_double_well(1), v1(0.7), 1e-5), 1e-6);
  Vector x(2);
  x << 0.3, -0.2;
  EXPECT_LT(grad_check(*make_gauss_mix(2), x, 1e-5), 1e-6);
}

TEST(GradCheck, AllBuiltinsAtRandomPoints) {
  for (const auto& m : builtins()) {
    for (int i = 0; i < 20; ++i) {
      const Vector x = 2.0 * Vector::Random(m->dim());
      EXPECT_LT(grad_check(*m, x, 1e-5), 1e-5) << m->name();
    }
  }
}

TEST(HessianApply, MatchesJacobianDifferences) {
  for (const auto& m : builtins()) {
    const Vector x = Vector::Random(m->dim());
    const Vector h = Vector::Random(m->dim());
    const double s = 1e-5;
    const Matrix fd = (m->jacobian(x + s * h) - m->jacobian(x - s * h)) / (2.0 * s);
    EXPECT_LT((fd - m->hessian_apply(x, h)).cwiseAbs().maxCoeff(), 1e-6) << m->name();
  }
}

TEST(Potential, GradientOfPotentialIsMinusDrift) {
  for (const auto& m : builtins()) {
    const Vector x = Vector::Random(m->dim());
    if (!m->potential(x)) continue;
    for (int i = 0; i < m->dim(); ++i) {
      const double s = 1e-6;
      Vector e = Vector::Zero(m->dim());
      e(i) = s;
      const double g = (*m->potential(x + e) - *m->potential(x - e)) / (2.0 * s);
      EXPECT_NEAR(g, -m->eval(x)(i), 1e-6) << m->name();
    }
    if (auto floor = m->constants().potential_floor) {
      EXPECT_GE(*m->potential(x), *floor - 1e-12) << m->name();
    }
  }
}

TEST(Lipschitz, DeclaredConstantsHoldOnSamples) {
  for (const auto& m : builtins()) {
    const LipschitzReport r = lipschitz_check(*m, 100, 10.0, 5);
    EXPECT_TRUE(r.l1_ok) << m->name() << " ratio " << r.max_L1_ratio;
    EXPECT_TRUE(r.l2_ok) << m->name() << " ratio " << r.max_L2_ratio;
    EXPECT_LE(r.max_L1_ratio, m->constants().L1 * (1 + 1e-9) + 1e-9);
  }
}

TEST(Lipschitz, UnderstatedConstantIsCaught) {
  // b(x) = -3x checked against a model that claims L1 = 1 via a scaled OU.
  struct Liar : DriftModel {
    Liar() : DriftModel("liar", 1, SmoothnessCert{1.0, 0.0, 0.0, {}, {}, {}, false}) {}
    Vector do_eval(const Vector& x) const override { return -3.0 * x; }
    Matrix do_jacobian(const Vector&) const override { return Matrix::Constant(1, 1, -3.0); }
    Matrix do_hessian_apply(const Vector&, const Vector&) const override { return Matrix::Zero(1, 1); }
  };
  const LipschitzReport r = lipschitz_check(Liar{}, 50, 5.0, 1);
  EXPECT_FALSE(r.l1_ok);
  EXPECT_NEAR(r.max_L1_ratio, 3.0, 1e-12);
  EXPECT_EQ(r.l1_witness_x.size(), 1);
}

TEST(Dissipativity, Ladder) {
  const auto ladder = dissipativity_ladder();
  ASSERT_EQ(ladder.size(), 14u);
  EXPECT_EQ(ladder.front(), 8.0);
  EXPECT_EQ(ladder.back(), std::ldexp(1.0, -10));
}

TEST(Dissipativity, OuFit) {
  const auto fit = dissipativity_fit(*make_ou(2), radius_grid(10.0, 200), 16, 1);
  ASSERT_TRUE(fit.constants);
  EXPECT_EQ(fit.constants->mu, 1.0);
  EXPECT_NEAR(fit.constants->beta, 0.0, 1e-8);
}

TEST(Dissipativity, ExpansiveDriftFails) {
  const auto expansive = make_linear_drift(Matrix::Identity(2, 2), Vector::Zero(2));
  const auto fit = dissipativity_fit(*expansive, radius_grid(10.0, 200), 16, 1);
  EXPECT_FALSE(fit.constants);
  EXPECT_EQ(fit.witness.size(), 2);
  EXPECT_GT(fit.witness_value, 0.0);
}

TEST(Dissipativity, DoubleWellDeclaredPairHolds) {
  // max_r (mu + 1/2) r^2 - r^4 / 2 = (mu + 1/2)^2 / 2 = 0.5 at mu = 0.5.
  const auto dw = make_double_well(3);
  ASSERT_TRUE(dw->constants().dissipativity);
  EXPECT_EQ(dw->constants().dissipativity->mu, 0.5);
  EXPECT_EQ(dw->constants().dissipativity->beta, 0.5);
  EXPECT_FALSE(check_dissipativity(*dw, {0.5, 0.5}, 10000, 10.0, 3));
  EXPECT_TRUE(check_dissipativity(*dw, {0.5, 0.45}, 10000, 10.0, 3));
}

TEST(Dissipativity, FitOutputHoldsAtFreshPoints) {
  for (const auto& m : builtins()) {
    const auto fit = dissipativity_fit(*m, radius_grid(10.0, 400), 16, 11);
    if (m->name() == "zero") {
      EXPECT_FALSE(fit.constants);
      continue;
    }
    ASSERT_TRUE(fit.constants) << m->name();
    EXPECT_GT(fit.constants->mu, 0.0);
    EXPECT_FALSE(check_dissipativity(*m, *fit.constants, 10000, 10.0, 99)) << m->name();
  }
}

TEST(VerifyInit, Examples) {
  const auto std1 = verify_init({v1(0.0), 1.0});
  EXPECT_NEAR(std1.h0, 0.5 * std::log(2 * M_PI), 1e-12);
  EXPECT_NEAR(std1.sigma0, std::sqrt(2.0), 1e-15);

  const auto wide = verify_init({Vector::Zero(2), 2.0});
  EXPECT_NEAR(wide.h0, std::log(8 * M_PI), 1e-12);
  EXPECT_NEAR(wide.sigma0, 2.0 * std::sqrt(2.0), 1e-15);

  // Centered case is tight.
  const InitDensity n01{v1(0.0), 1.0};
  EXPECT_NEAR(n01.neg_log_density(v1(3.0)), std1.h0 + 9.0 / (std1.sigma0 * std1.sigma0), 1e-12);
}

TEST(VerifyInit, CertificateHoldsOnGrid) {
  for (double m0 : {0.0, 0.5, -2.0, 3.0}) {
    for (double s : {0.3, 1.0, 2.5}) {
      const InitDensity init{v1(m0), s};
      const auto cert = verify_init(init);
      for (double x = -20.0; x <= 20.0; x += 0.01) {
        const double rhs = cert.h0 + x * x / (cert.sigma0 * cert.sigma0);
        ASSERT_LE(init.neg_log_density(v1(x)), rhs + 1e-10) << m0 << " " << s << " " << x;
      }
    }
  }
}

TEST(Registry, NamesAndParameters) {
  for (const auto& name : registered_models()) {
    nlohmann::json p = {{"dim", 2}};
    if (name == "linear") p["A"] = {{-1.0, 0.0}, {0.0, -2.0}};
    EXPECT_EQ(make_model(name, p)->dim(), 2) << name;
  }
  EXPECT_EQ(make_model("ou", {{"dim", 1}})->name(), "ou");
  EXPECT_EQ(make_model("ou", {{"A", {{-2.0}}}, {"c", {1.0}}})->eval(v1(0.0))(0), 1.0);
  EXPECT_EQ(make_model("linear", {{"A", {{1.0}}}})->name(), "linear");
  EXPECT_THROW(make_model("nope", nlohmann::json::object()), ConfigError);
  EXPECT_THROW(make_model("ou", {{"dim", 0}}), ConfigError);
}

TEST(Certificates, AnalyticConstants) {
  const auto dw = make_double_well(1, 2.5);
  EXPECT_DOUBLE_EQ(dw->constants().L1, 0.5 * (3 * 6.25 - 1));
  EXPECT_DOUBLE_EQ(dw->constants().L2, 7.5);
  EXPECT_EQ(*dw->constants().radius, 2.5);
  const auto ou = make_ou(2, 3.0);
  EXPECT_DOUBLE_EQ(ou->constants().L1, 3.0);
  EXPECT_EQ(ou->constants().L2, 0.0);
  EXPECT_EQ(ou->constants().dissipativity->mu, 3.0);
  EXPECT_EQ(ou->constants().dissipativity->beta, 0.0);
}
