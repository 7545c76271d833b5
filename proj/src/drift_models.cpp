#include "langevin/drift_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "langevin/errors.hpp"
#include "langevin/noise.hpp"

namespace langevin {

// InitDensity ----------------------------------------------------------------

double InitDensity::neg_log_density(const Eigen::VectorXd& x) const {
  const double d = static_cast<double>(dim());
  return 0.5 * d * std::log(2.0 * std::numbers::pi * sigma * sigma) +
         (x - mean).squaredNorm() / (2.0 * sigma * sigma);
}

double InitDensity::entropy() const {
  const double d = static_cast<double>(dim());
  return 0.5 * d * (1.0 + std::log(2.0 * std::numbers::pi)) +
         d * std::log(sigma);
}

// DriftModel -----------------------------------------------------------------

DriftModel::DriftModel(std::string name, int dim, SmoothnessCert cert)
    : name_(std::move(name)), dim_(dim), cert_(std::move(cert)) {
  if (dim <= 0) throw InputError("drift model dimension must be positive");
}

void DriftModel::check_dim(const Vector& x) const {
  if (x.size() != dim_) {
    throw InputError("dimension mismatch: model " + name_ + " has dim " +
                     std::to_string(dim_) + ", point has " +
                     std::to_string(x.size()));
  }
}

Vector DriftModel::eval(const Vector& x) const {
  check_dim(x);
  Vector out = do_eval(x);
  if (!out.allFinite()) {
    throw ModelError("drift " + name_ + " returned a non-finite value");
  }
  return out;
}

Matrix DriftModel::jacobian(const Vector& x) const {
  check_dim(x);
  return do_jacobian(x);
}

Matrix DriftModel::hessian_apply(const Vector& x, const Vector& direction) const {
  check_dim(x);
  check_dim(direction);
  return do_hessian_apply(x, direction);
}

std::optional<double> DriftModel::potential(const Vector&) const {
  return std::nullopt;
}

std::optional<std::pair<Matrix, Vector>> DriftModel::affine_form() const {
  return std::nullopt;
}

namespace {

class ZeroDrift final : public DriftModel {
 public:
  explicit ZeroDrift(int dim)
      : DriftModel("zero", dim, SmoothnessCert{0.0, 0.0, 0.0, std::nullopt, 0.0,
                                               std::nullopt, true}) {}

  std::optional<double> potential(const Vector&) const override { return 0.0; }
  std::optional<std::pair<Matrix, Vector>> affine_form() const override {
    return std::pair{Matrix::Zero(dim(), dim()), Vector::Zero(dim())};
  }

 protected:
  Vector do_eval(const Vector& x) const override {
    return Vector::Zero(x.size());
  }
  Matrix do_jacobian(const Vector& x) const override {
    return Matrix::Zero(x.size(), x.size());
  }
  Matrix do_hessian_apply(const Vector& x, const Vector&) const override {
    return Matrix::Zero(x.size(), x.size());
  }
};

SmoothnessCert linear_cert(const Matrix& A, const Vector& c) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  const Vector& ev = eig.eigenvalues();
  SmoothnessCert cert;
  cert.L1 = ev.cwiseAbs().maxCoeff();
  cert.L2 = 0.0;
  cert.A0 = c.norm();
  const double top = ev.maxCoeff();
  if (top < 0.0) {
    const double lam = -top;
    // <Ax + c, x> <= -lam r^2 + |c| r <= -(lam/2) r^2 + |c|^2 / (2 lam).
    if (cert.A0 == 0.0) {
      cert.dissipativity = Dissipativity{lam, 0.0};
    } else {
      cert.dissipativity = Dissipativity{lam / 2.0, cert.A0 * cert.A0 / (2.0 * lam)};
    }
    // f(x) = -x'Ax/2 - c'x is minimized at x* = -A^{-1} c.
    const Vector xstar = -A.ldlt().solve(c);
    cert.potential_floor = -0.5 * xstar.dot(A * xstar) - c.dot(xstar);
  }
  return cert;
}

class LinearDriftModel final : public DriftModel {
 public:
  LinearDriftModel(const Matrix& A, const Vector& c, std::string name)
      : DriftModel(std::move(name), static_cast<int>(c.size()), linear_cert(A, c)),
        A_(A),
        c_(c) {}

  std::optional<double> potential(const Vector& x) const override {
    return -0.5 * x.dot(A_ * x) - c_.dot(x);
  }
  std::optional<std::pair<Matrix, Vector>> affine_form() const override {
    return std::pair{A_, c_};
  }

 protected:
  Vector do_eval(const Vector& x) const override { return A_ * x + c_; }
  Matrix do_jacobian(const Vector&) const override { return A_; }
  Matrix do_hessian_apply(const Vector& x, const Vector&) const override {
    return Matrix::Zero(x.size(), x.size());
  }

 private:
  Matrix A_;
  Vector c_;
};

class DoubleWell final : public DriftModel {
 public:
  DoubleWell(int dim, double radius)
      : DriftModel("double-well", dim, cert_for(radius)) {}

  // f = U/2 = |x|^4/8 - |x|^2/4, minimized on |x| = 1.
  std::optional<double> potential(const Vector& x) const override {
    const double r2 = x.squaredNorm();
    return r2 * r2 / 8.0 - r2 / 4.0;
  }

 protected:
  Vector do_eval(const Vector& x) const override {
    return -0.5 * (x.squaredNorm() - 1.0) * x;
  }
  Matrix do_jacobian(const Vector& x) const override {
    const auto n = x.size();
    return -0.5 * ((x.squaredNorm() - 1.0) * Matrix::Identity(n, n) +
                   2.0 * x * x.transpose());
  }
  Matrix do_hessian_apply(const Vector& x, const Vector& h) const override {
    const auto n = x.size();
    return -(x.dot(h) * Matrix::Identity(n, n) + h * x.transpose() +
             x * h.transpose());
  }

 private:
  static SmoothnessCert cert_for(double radius) {
    if (!(radius > 0.0)) throw InputError("double-well radius must be positive");
    SmoothnessCert cert;
    // Jacobian eigenvalues: -(r^2-1)/2 across, -(3r^2-1)/2 radially.
    cert.L1 = std::max(0.5, 0.5 * (3.0 * radius * radius - 1.0));
    cert.L2 = 3.0 * radius;
    cert.A0 = 0.0;
    // max_r (mu + 1/2) r^2 - r^4/2 = (mu + 1/2)^2 / 2, which is 1/2 at mu = 1/2.
    cert.dissipativity = Dissipativity{0.5, 0.5};
    cert.potential_floor = -1.0 / 8.0;
    cert.radius = radius;
    return cert;
  }
};

class GaussMix final : public DriftModel {
 public:
  explicit GaussMix(const Vector& a)
      : DriftModel("gauss-mix", static_cast<int>(a.size()), cert_for(a)), a_(a) {}

  // f = U/2 = |x|^2/4 - log cosh(a.x)/2 (up to a constant).
  std::optional<double> potential(const Vector& x) const override {
    return 0.25 * x.squaredNorm() - 0.5 * log_cosh(a_.dot(x));
  }

 protected:
  Vector do_eval(const Vector& x) const override {
    return -0.5 * x + 0.5 * std::tanh(a_.dot(x)) * a_;
  }
  Matrix do_jacobian(const Vector& x) const override {
    const auto n = x.size();
    const double t = std::tanh(a_.dot(x));
    return -0.5 * Matrix::Identity(n, n) + 0.5 * (1.0 - t * t) * a_ * a_.transpose();
  }
  Matrix do_hessian_apply(const Vector& x, const Vector& h) const override {
    const double t = std::tanh(a_.dot(x));
    return -(1.0 - t * t) * t * a_.dot(h) * (a_ * a_.transpose());
  }

 private:
  static double log_cosh(double u) {
    const double au = std::abs(u);
    return au + std::log1p(std::exp(-2.0 * au)) - std::numbers::ln2;
  }

  static SmoothnessCert cert_for(const Vector& a) {
    const double na = a.norm();
    const double na2 = na * na;
    SmoothnessCert cert;
    cert.L1 = std::max(0.5, 0.5 * na2 - 0.5);
    // max_u sech^2(u) tanh(u) = 2 / (3 sqrt 3).
    cert.L2 = na2 * na * 2.0 / (3.0 * std::sqrt(3.0));
    cert.A0 = 0.0;
    // <b,x> <= -r^2/2 + |a| r/2 <= -r^2/4 + |a|^2/4.
    cert.dissipativity = Dissipativity{0.25, na2 / 4.0};
    // Minimum along a: t = |a| tanh(|a| t), t the coordinate along a/|a|.
    double t = na;
    for (int i = 0; i < 200; ++i) t = na * std::tanh(na * t);
    cert.potential_floor = 0.25 * t * t - 0.5 * log_cosh(na * t);
    return cert;
  }

  Vector a_;
};

Matrix json_matrix(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrix parameter must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j.at(i).size()) != cols) throw ConfigError("ragged matrix parameter");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

Vector json_vector(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("vector parameter must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

// Builds (A, c) for "ou" / "linear" from either explicit matrices or
// dim + scale (b = scale * x for linear, b = -scale * x for ou).
std::pair<Matrix, Vector> linear_params(const nlohmann::json& p, bool ou) {
  Matrix A;
  if (p.contains("A")) {
    A = json_matrix(p["A"]);
  } else {
    const int dim = p.value("dim", 1);
    const double scale = p.value("scale", 1.0);
    A = (ou ? -scale : scale) * Matrix::Identity(dim, dim);
  }
  Vector c = p.contains("c") ? json_vector(p["c"]) : Vector::Zero(A.rows());
  if (A.rows() != A.cols() || A.rows() != c.size()) {
    throw ConfigError("linear drift: A must be square and match c");
  }
  return {A, c};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Vector random_direction(const CounterNormals& normals, int dim,
                        std::uint64_t index, std::uint32_t sub) {
  Vector v(dim);
  do {
    normals.fill({v.data(), static_cast<std::size_t>(dim)}, index, 0,
                 NoiseStream::kAuxiliary, sub++);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

Vector random_in_ball(const CounterNormals& normals, int dim, double radius,
                      std::uint64_t index) {
  Vector dir = random_direction(normals, dim, index, 0);
  const double u = normals.uniform(index, 1, NoiseStream::kAuxiliary);
  return radius * std::pow(u, 1.0 / dim) * dir;
}

void require_dim(long dim) {
  if (dim < 1) throw InputError("model dimension must be at least 1");
}

}  // namespace

DriftModelPtr make_zero_drift(int dim) {
  require_dim(dim);
  return std::make_shared<ZeroDrift>(dim);
}

DriftModelPtr make_linear_drift(const Matrix& A, const Vector& c) {
  if (A.rows() != A.cols() || A.rows() != c.size()) {
    throw InputError("linear drift: A must be square and match c");
  }
  require_dim(A.rows());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw UnsupportedError("linear drift requires a symmetric A");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  const bool negative_definite = eig.eigenvalues().maxCoeff() < 0.0;
  return std::make_shared<LinearDriftModel>(A, c, negative_definite ? "ou" : "linear");
}

DriftModelPtr make_ou(int dim, double scale) {
  require_dim(dim);
  if (!(scale > 0.0)) throw InputError("ou scale must be positive");
  return make_linear_drift(-scale * Matrix::Identity(dim, dim), Vector::Zero(dim));
}

DriftModelPtr make_double_well(int dim, double radius) {
  require_dim(dim);
  if (!(radius > 0.0)) throw InputError("double-well radius must be positive");
  return std::make_shared<DoubleWell>(dim, radius);
}

DriftModelPtr make_gauss_mix(const Vector& separation) {
  require_dim(separation.size());
  return std::make_shared<GaussMix>(separation);
}

DriftModelPtr make_gauss_mix(int dim, double separation) {
  return make_gauss_mix(Vector::Constant(dim, separation));
}

std::vector<std::string> registered_models() {
  return {"zero", "ou", "linear", "double-well", "gauss-mix"};
}

DriftModelPtr make_model(std::string_view name, const nlohmann::json& params) {
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  try {
    if (name == "zero") return make_zero_drift(p.value("dim", 1));
    if (name == "ou" || name == "linear") {
      auto [A, c] = linear_params(p, name == "ou");
      auto model = make_linear_drift(A, c);
      if (name == "ou" && model->name() != "ou") {
        throw ConfigError("ou model requires a negative definite A");
      }
      return model;
    }
    if (name == "double-well") {
      return make_double_well(p.value("dim", 1), p.value("radius", 2.5));
    }
    if (name == "gauss-mix") {
      if (p.contains("separation") && p["separation"].is_array()) {
        return make_gauss_mix(json_vector(p["separation"]));
      }
      return make_gauss_mix(p.value("dim", 2), p.value("separation", 1.5));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad parameters for model ") + std::string(name) + ": " + e.what());
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown model: " + std::string(name));
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double grad_check(const DriftModel& model, const Vector& x, double h) {
  if (!(h > 0.0)) throw InputError("grad_check step must be positive");
  const Matrix J = model.jacobian(x);
  double worst = 0.0;
  for (int i = 0; i < model.dim(); ++i) {
    Vector e = Vector::Zero(model.dim());
    e(i) = h;
    const Vector fd = (model.eval(x + e) - model.eval(x - e)) / (2.0 * h);
    for (int r = 0; r < model.dim(); ++r) {
      worst = std::max(worst, std::abs(fd(r) - J(r, i)) / (1.0 + std::abs(J(r, i))));
    }
  }
  return worst;
}

LipschitzReport lipschitz_check(const DriftModel& model, int pairs,
                                double radius, std::uint64_t seed) {
  const auto& cert = model.constants();
  if (cert.radius) radius = std::min(radius, *cert.radius);
  const CounterNormals normals(mix_seed(seed, 1));
  const int d = model.dim();
  LipschitzReport report;
  for (int i = 0; i < pairs; ++i) {
    const Vector x = random_in_ball(normals, d, radius, 2 * static_cast<std::uint64_t>(i));
    Vector y = random_in_ball(normals, d, radius, 2 * static_cast<std::uint64_t>(i) + 1);
    // Every other pair is a short chord, which probes local slopes.
    if (i % 2 == 1) {
      y = x + 1e-3 * (y - x);
    }
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    const double tol = 1e-9 * (1.0 + dist);
    const double db = (model.eval(x) - model.eval(y)).norm();
    const double dj = operator_norm(model.jacobian(x) - model.jacobian(y));
    if (db / dist > report.max_L1_ratio) report.max_L1_ratio = db / dist;
    if (dj / dist > report.max_L2_ratio) report.max_L2_ratio = dj / dist;
    if (db > cert.L1 * dist + tol && report.l1_ok) {
      report.l1_ok = false;
      report.l1_witness_x = x;
      report.l1_witness_y = y;
    }
    if (dj > cert.L2 * dist + tol && report.l2_ok) {
      report.l2_ok = false;
      report.l2_witness_x = x;
      report.l2_witness_y = y;
    }
  }
  return report;
}

std::vector<double> dissipativity_ladder() {
  std::vector<double> ladder;
  for (int k = 3; k >= -10; --k) ladder.push_back(std::ldexp(1.0, k));
  return ladder;
}

DissipativityFit dissipativity_fit(const DriftModel& model,
                                   std::vector<double> radius_grid,
                                   int directions_per_radius,
                                   std::uint64_t seed) {
  if (radius_grid.empty()) throw InputError("dissipativity_fit: empty radius grid");
  if (directions_per_radius < 1) throw InputError("dissipativity_fit: need at least one direction");
  for (double r : radius_grid) {
    if (!(r > 0.0)) throw InputError("dissipativity_fit: radii must be positive");
  }
  std::sort(radius_grid.begin(), radius_grid.end());

  const CounterNormals normals(mix_seed(seed, 2));
  const int d = model.dim();
  const std::size_t nr = radius_grid.size();

  // inner[r][j] = <b(x), x>, sq[r] = |x|^2 for the sampled points.
  std::vector<std::vector<double>> inner(nr);
  std::vector<std::vector<Vector>> points(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    for (int j = 0; j < directions_per_radius; ++j) {
      const Vector x = radius_grid[r] *
                       random_direction(normals, d, r * directions_per_radius + j, 0);
      inner[r].push_back(model.eval(x).dot(x));
      points[r].push_back(x);
    }
  }

  DissipativityFit fit;
  for (double mu : dissipativity_ladder()) {
    std::vector<double> shell_max(nr);
    for (std::size_t r = 0; r < nr; ++r) {
      const double r2 = radius_grid[r] * radius_grid[r];
      shell_max[r] = *std::max_element(inner[r].begin(), inner[r].end()) + mu * r2;
    }
    if (nr >= 2) {
      const double outer = radius_grid.back();
      const double tol = 1e-9 * (1.0 + outer * outer);
      if (shell_max[nr - 1] > shell_max[nr - 2] + tol) {
        const auto& last = inner[nr - 1];
        const auto at = std::max_element(last.begin(), last.end()) - last.begin();
        fit.witness = points[nr - 1][at];
        fit.witness_value = shell_max[nr - 1];
        continue;
      }
    }
    const double sup = std::max(0.0, *std::max_element(shell_max.begin(), shell_max.end()));
    fit.constants = Dissipativity{mu, sup * 1.02 + 1e-9};
    fit.witness = Vector();
    fit.witness_value = 0.0;
    return fit;
  }
  return fit;
}

std::optional<Vector> check_dissipativity(const DriftModel& model,
                                          const Dissipativity& constants,
                                          int points, double radius,
                                          std::uint64_t seed) {
  const CounterNormals normals(mix_seed(seed, 3));
  for (int i = 0; i < points; ++i) {
    const Vector x = random_in_ball(normals, model.dim(), radius, static_cast<std::uint64_t>(i));
    const double lhs = model.eval(x).dot(x);
    const double rhs = -constants.mu * x.squaredNorm() + constants.beta;
    if (lhs > rhs + 1e-12 * (1.0 + x.squaredNorm())) return x;
  }
  return std::nullopt;
}

InitCertificate verify_init(const InitDensity& density) {
  if (!(density.sigma > 0.0)) throw InputError("init sigma must be positive");
  const double d = static_cast<double>(density.dim());
  const double s2 = density.sigma * density.sigma;
  InitCertificate cert;
  cert.h0 = 0.5 * d * std::log(2.0 * std::numbers::pi * s2) +
            density.mean.squaredNorm() / s2;
  // Centered: -log pi0 = c + |x|^2 / (2 s^2) exactly. Otherwise
  // |x - m|^2 <= 2|x|^2 + 2|m|^2 gives the quadratic coefficient 1 / s^2.
  cert.sigma0 = density.mean.squaredNorm() == 0.0 ? density.sigma * std::sqrt(2.0)
                                                  : density.sigma;
  return cert;
}

}  // namespace langevin
