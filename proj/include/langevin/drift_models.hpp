#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "langevin/init_density.hpp"

namespace langevin {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Constants (mu, beta) of  <b(x), x> <= -mu |x|^2 + beta.
struct Dissipativity {
  double mu = 0.0;
  double beta = 0.0;
};

/// Declared regularity of a drift field.
struct SmoothnessCert {
  double L1 = 0.0;  // Lipschitz constant of b
  double L2 = 0.0;  // Lipschitz constant of the Jacobian (operator norm)
  double A0 = 0.0;  // |b(0)|
  std::optional<Dissipativity> dissipativity;
  /// min of f for gradient drifts b = -grad f (f as returned by potential()).
  std::optional<double> potential_floor;
  /// L1 and L2 hold on the ball |x| <= radius; empty means globally.
  std::optional<double> radius;
  /// False for user-declared constants that were only checked on samples.
  bool verified = true;
};

/// A drift field b: R^d -> R^d with first and second derivatives.
/// Instances are immutable and safe to share across threads.
class DriftModel {
 public:
  virtual ~DriftModel() = default;

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  const SmoothnessCert& constants() const { return cert_; }

  /// b(x). Throws InputError on dimension mismatch, ModelError on a
  /// non-finite result.
  Vector eval(const Vector& x) const;
  /// Jacobian grad b(x), entry (i, j) = d b_i / d x_j.
  Matrix jacobian(const Vector& x) const;
  /// Directional derivative of the Jacobian: d/ds grad b(x + s h) at s = 0.
  Matrix hessian_apply(const Vector& x, const Vector& direction) const;

  /// f with b = -grad f, for gradient drifts. Empty otherwise.
  virtual std::optional<double> potential(const Vector& x) const;

  /// (A, c) when b(x) = A x + c exactly. Empty for non-affine drifts.
  virtual std::optional<std::pair<Matrix, Vector>> affine_form() const;

 protected:
  DriftModel(std::string name, int dim, SmoothnessCert cert);

  virtual Vector do_eval(const Vector& x) const = 0;
  virtual Matrix do_jacobian(const Vector& x) const = 0;
  virtual Matrix do_hessian_apply(const Vector& x, const Vector& h) const = 0;

 private:
  void check_dim(const Vector& x) const;

  std::string name_;
  int dim_;
  SmoothnessCert cert_;
};

using DriftModelPtr = std::shared_ptr<const DriftModel>;

// Built-in models ------------------------------------------------------------

/// b = 0.
DriftModelPtr make_zero_drift(int dim);

/// b(x) = A x + c with A symmetric. Named "ou" when A is negative definite.
DriftModelPtr make_linear_drift(const Matrix& A, const Vector& c);

/// Isotropic OU b(x) = -scale * x.
DriftModelPtr make_ou(int dim, double scale = 1.0);

/// b(x) = -x (|x|^2 - 1) / 2, the score drift of U = |x|^4/4 - |x|^2/2.
/// L1 and L2 are certified on the ball of the given radius.
DriftModelPtr make_double_well(int dim, double radius = 2.5);

/// b = -grad U / 2 with U = -log(N(-a, I)/2 + N(a, I)/2).
DriftModelPtr make_gauss_mix(const Vector& separation);
DriftModelPtr make_gauss_mix(int dim, double separation = 1.5);

/// Registry: "zero", "ou", "linear", "double-well", "gauss-mix".
/// Parameters: "dim", "scale" (ou/linear isotropic), "A", "c" (ou/linear),
/// "radius" (double-well), "separation" (gauss-mix; scalar or vector).
DriftModelPtr make_model(std::string_view name, const nlohmann::json& params);

std::vector<std::string> registered_models();

// Certificate checks ---------------------------------------------------------

/// Largest central-difference mismatch of the Jacobian columns,
/// each relative to 1 + |column entry|.
double grad_check(const DriftModel& model, const Vector& x, double h);

struct LipschitzReport {
  double max_L1_ratio = 0.0;  // max |b(x)-b(y)| / |x-y| seen
  double max_L2_ratio = 0.0;  // max |Jb(x)-Jb(y)|_op / |x-y| seen
  bool l1_ok = true;
  bool l2_ok = true;
  Vector l1_witness_x, l1_witness_y;
  Vector l2_witness_x, l2_witness_y;
};

/// Samples pairs in the ball |x| <= radius (the certified radius when the
/// model has one and it is smaller) and tests the declared L1, L2 with
/// tolerance 1e-9 (1 + |x - y|).
LipschitzReport lipschitz_check(const DriftModel& model, int pairs,
                                double radius, std::uint64_t seed);

struct DissipativityFit {
  std::optional<Dissipativity> constants;
  /// On failure: the sampled point of largest <b(x),x> + mu |x|^2 for the
  /// smallest ladder mu, at the outermost radius.
  Vector witness;
  double witness_value = 0.0;
};

/// The mu ladder {2^k : k = -10..3}, largest first.
std::vector<double> dissipativity_ladder();

/// Largest ladder mu for which <b(x),x> + mu |x|^2 stops growing at the
/// outer edge of the radius grid, paired with the smallest beta covering
/// every sampled point (plus 2% slack). Failure is a result, not an error.
DissipativityFit dissipativity_fit(const DriftModel& model,
                                   std::vector<double> radius_grid,
                                   int directions_per_radius,
                                   std::uint64_t seed);

/// Checks <b(x),x> <= -mu |x|^2 + beta at `points` uniform draws in the ball
/// of the given radius. Returns the first violating point, if any.
std::optional<Vector> check_dissipativity(const DriftModel& model,
                                          const Dissipativity& constants,
                                          int points, double radius,
                                          std::uint64_t seed);

/// (h0, sigma0) with -log pi0(x) <= h0 + |x|^2 / sigma0^2 for all x.
struct InitCertificate {
  double h0 = 0.0;
  double sigma0 = 0.0;
};

InitCertificate verify_init(const InitDensity& density);

/// Operator (spectral) norm.
double operator_norm(const Matrix& m);

}  // namespace langevin
