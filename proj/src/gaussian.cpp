#include "langevin/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "langevin/errors.hpp"

namespace langevin {

namespace {

void check_same_dim(const GaussianMoments& p, const GaussianMoments& q) {
  if (p.dim() != q.dim()) throw InputError("gaussian dimension mismatch");
}

void check_drift(const LinearDrift& drift, const GaussianMoments& m) {
  if (drift.A.rows() != drift.A.cols() || drift.A.rows() != drift.c.size()) {
    throw InputError("linear drift: A must be square and match c");
  }
  if (drift.dim() != m.dim()) throw InputError("drift and moments dimension mismatch");
}

Eigen::LLT<Matrix> cholesky_or_throw(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  return llt;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// (e^{x t} - 1) / x, continuous at x = 0.
double phi1(double x, double t) {
  if (std::abs(x * t) < 1e-12) return t * (1.0 + 0.5 * x * t);
  return std::expm1(x * t) / x;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

void GaussianMoments::validate() const {
  if (cov.rows() != cov.cols() || cov.rows() != mean.size()) {
    throw InputError("covariance shape does not match mean");
  }
  if (!mean.allFinite() || !cov.allFinite()) throw InputError("non-finite moments");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InputError("covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw InputError("covariance is not positive definite");
  }
}

GaussianMoments GaussianMoments::isotropic(const Vector& mean, double variance) {
  const auto d = mean.size();
  return {mean, variance * Matrix::Identity(d, d)};
}

bool LinearDrift::symmetric(double tol) const {
  return A.rows() == A.cols() && (A - A.transpose()).cwiseAbs().maxCoeff() <= tol;
}

GaussianMoments continuous_moments_linear(const LinearDrift& drift,
                                          const GaussianMoments& init, double t) {
  check_drift(drift, init);
  if (!(t >= 0.0)) throw InputError("time must be nonnegative");
  if (!drift.symmetric()) {
    throw UnsupportedError("closed-form moments need a symmetric A; use continuous_moments_rk4");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(drift.A);
  const Matrix& Q = eig.eigenvectors();
  const Vector& lam = eig.eigenvalues();
  const int d = drift.dim();

  const Vector y0 = Q.transpose() * init.mean;
  const Vector c = Q.transpose() * drift.c;
  Vector y(d);
  for (int i = 0; i < d; ++i) y(i) = std::exp(lam(i) * t) * y0(i) + phi1(lam(i), t) * c(i);

  const Matrix s0 = Q.transpose() * init.cov * Q;
  Matrix s(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double rate = lam(i) + lam(j);
      s(i, j) = std::exp(rate * t) * s0(i, j) + (i == j ? phi1(rate, t) : 0.0);
    }
  }
  GaussianMoments out{Q * y, Q * s * Q.transpose()};
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

GaussianMoments continuous_moments_rk4(const LinearDrift& drift,
                                       const GaussianMoments& init, double t,
                                       double step) {
  check_drift(drift, init);
  if (!(t >= 0.0) || !(step > 0.0)) throw InputError("rk4: need t >= 0 and step > 0");
  const auto n = static_cast<long>(std::ceil(t / step));
  if (n == 0) return init;
  const double h = t / static_cast<double>(n);
  const Matrix& A = drift.A;
  const Matrix I = Matrix::Identity(drift.dim(), drift.dim());
  auto fm = [&](const Vector& m) -> Vector { return A * m + drift.c; };
  auto fs = [&](const Matrix& s) -> Matrix { return A * s + s * A.transpose() + I; };

  Vector m = init.mean;
  Matrix s = init.cov;
  for (long i = 0; i < n; ++i) {
    const Vector k1 = fm(m);
    const Vector k2 = fm(m + 0.5 * h * k1);
    const Vector k3 = fm(m + 0.5 * h * k2);
    const Vector k4 = fm(m + h * k3);
    m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const Matrix l1 = fs(s);
    const Matrix l2 = fs(s + 0.5 * h * l1);
    const Matrix l3 = fs(s + 0.5 * h * l2);
    const Matrix l4 = fs(s + h * l3);
    s += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
  }
  return {m, 0.5 * (s + s.transpose())};
}

GaussianMoments em_moments_linear(const LinearDrift& drift,
                                  const GaussianMoments& init, double eta,
                                  std::uint64_t k) {
  check_drift(drift, init);
  if (!(eta > 0.0)) throw InputError("step size must be positive");
  const int d = drift.dim();
  const Matrix F = Matrix::Identity(d, d) + eta * drift.A;
  const Vector shift = eta * drift.c;
  const Matrix noise = eta * Matrix::Identity(d, d);
  GaussianMoments out = init;
  for (std::uint64_t i = 0; i < k; ++i) {
    out.mean = F * out.mean + shift;
    out.cov = F * out.cov * F.transpose() + noise;
  }
  return out;
}

GaussianMoments interp_moments_linear(const LinearDrift& drift,
                                      const GaussianMoments& grid_moments,
                                      double tau, double eta) {
  check_drift(drift, grid_moments);
  if (!(tau >= 0.0 && tau <= eta)) throw InputError("interpolation offset outside [0, eta]");
  const int d = drift.dim();
  const Matrix F = Matrix::Identity(d, d) + tau * drift.A;
  return {F * grid_moments.mean + tau * drift.c,
          F * grid_moments.cov * F.transpose() + tau * Matrix::Identity(d, d)};
}

GaussianMoments stationary_moments(const LinearDrift& drift) {
  if (!drift.symmetric()) throw UnsupportedError("stationary moments need a symmetric A");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(drift.A);
  if (!(eig.eigenvalues().maxCoeff() < 0.0)) {
    throw InputError("stationary law needs a negative definite A");
  }
  // A S + S A = -I  =>  S = -A^{-1} / 2 for symmetric A.
  const Matrix Ainv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                      eig.eigenvectors().transpose();
  return {-Ainv * drift.c, -0.5 * Ainv};
}

double kl_gaussian(const GaussianMoments& p, const GaussianMoments& q) {
  check_same_dim(p, q);
  const auto lp = cholesky_or_throw(p.cov);
  const auto lq = cholesky_or_throw(q.cov);
  const Vector dm = q.mean - p.mean;
  const double trace = lq.solve(p.cov).trace();
  const double quad = dm.dot(lq.solve(dm));
  const double value = 0.5 * (trace + quad - p.dim() + log_det(lq) - log_det(lp));
  return std::max(0.0, value);
}

Matrix sqrtm_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Vector root = eig.eigenvalues().cwiseMax(1e-14).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double w2_gaussian(const GaussianMoments& p, const GaussianMoments& q) {
  check_same_dim(p, q);
  const Matrix rq = sqrtm_psd(q.cov);
  const Matrix cross = sqrtm_psd(rq * p.cov * rq);
  const double bures = std::max(0.0, (p.cov + q.cov - 2.0 * cross).trace());
  const double value = std::sqrt((p.mean - q.mean).squaredNorm() + bures);
  if (!std::isfinite(value)) throw NumericalError("w2_gaussian: non-finite result");
  return value;
}

double tv_gaussian_1d(const GaussianMoments& p, const GaussianMoments& q) {
  check_same_dim(p, q);
  if (p.dim() != 1) throw UnsupportedError("tv_gaussian_1d: dimension must be 1");
  const double m1 = p.mean(0), m2 = q.mean(0);
  const double v1 = p.cov(0, 0), v2 = q.cov(0, 0);
  if (!(v1 > 0.0 && v2 > 0.0)) throw NumericalError("tv_gaussian_1d: nonpositive variance");
  const double s1 = std::sqrt(v1), s2 = std::sqrt(v2);

  // Crossings of the two densities: a x^2 + b x + c = 0.
  std::vector<double> roots;
  const double a = 1.0 / v2 - 1.0 / v1;
  const double b = 2.0 * (m1 / v1 - m2 / v2);
  const double c = m2 * m2 / v2 - m1 * m1 / v1 + std::log(v2 / v1);
  if (std::abs(a) < 1e-14 * (1.0 / v1 + 1.0 / v2)) {
    if (b != 0.0) roots.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      roots.push_back((-b - sq) / (2.0 * a));
      roots.push_back((-b + sq) / (2.0 * a));
    }
  }
  std::sort(roots.begin(), roots.end());
  // TV = sum over intervals where p > q of (P - Q) mass.
  std::vector<double> edges{-INFINITY};
  edges.insert(edges.end(), roots.begin(), roots.end());
  edges.push_back(INFINITY);
  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto cdf_p = [&](double x) { return normal_cdf((x - m1) / s1); };
    auto cdf_q = [&](double x) { return normal_cdf((x - m2) / s2); };
    const double mass = (cdf_p(edges[i + 1]) - cdf_p(edges[i])) -
                        (cdf_q(edges[i + 1]) - cdf_q(edges[i]));
    if (mass > 0.0) tv += mass;
  }
  return std::clamp(tv, 0.0, 1.0);
}

double fisher_info_gaussian(const GaussianMoments& p) {
  const auto llt = cholesky_or_throw(p.cov);
  return llt.solve(Matrix::Identity(p.dim(), p.dim())).trace();
}

double entropy_gaussian(const GaussianMoments& p) {
  const auto llt = cholesky_or_throw(p.cov);
  return 0.5 * p.dim() * (1.0 + std::log(2.0 * std::numbers::pi)) + 0.5 * log_det(llt);
}

}  // namespace langevin
