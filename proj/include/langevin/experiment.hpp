#pragma once

// Experiment configuration and the CLI subcommands as in-process functions.
// Each command returns its report and artifacts; the CLI writes them out.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "langevin/bounds.hpp"
#include "langevin/drift_models.hpp"
#include "langevin/estimators.hpp"
#include "langevin/init_density.hpp"

namespace langevin {

inline constexpr const char* kBinaryVersion = "1.0.0";

struct ExperimentConfig {
  std::string model = "ou";
  nlohmann::json model_params = nlohmann::json::object();
  std::vector<double> init_mean;  // empty: origin in the model dimension
  double init_sigma = 1.0;

  std::optional<double> eta;
  std::vector<double> eta_grid;
  double horizon = 1.0;
  std::uint64_t chains = 1000;
  std::uint64_t seed = 0;
  std::vector<double> snapshot_times;

  // Estimators.
  std::vector<std::string> estimators;
  int knn_k = kDefaultKnnK;
  int tv_bins = kDefaultTvBins;
  int quad_points = kDefaultQuadPoints;
  std::vector<int> moment_orders{1, 2, 4};
  std::string p_path, q_path;

  // rate-scan
  bool exact = true;
  bool girsanov = true;

  // mixing-scan
  std::optional<double> rho;
  std::vector<double> eps_grid;
  std::string metric = "KL";
  double scale_constant = 1.0;
  std::uint64_t max_steps = 10'000'000;

  // bound-eval
  int theorem = 1;
  std::optional<int> dim;
  nlohmann::json constants = nlohmann::json::object();
  std::string constants_file;

  // verify
  double verify_radius = 10.0;

  int threads = 1;
  std::string output;

  /// Canonical JSON (keys sorted); the hash of its dump pins the run.
  nlohmann::json to_json() const;
  std::string hash() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  DriftModelPtr build_model() const;
  InitDensity build_init(int dim) const;
};

/// Reads a constants document. Missing required names are enumerated in
/// one ConfigError.
BoundConstants parse_constants(const nlohmann::json& j);

/// Constants implied by a model certificate and a Gaussian init: L1, L2, A0,
/// (mu, beta) when declared, (h0, sigma0) from verify_init, H(pi0), and
/// f0 = f(0) - min f for gradient drifts.
BoundConstants derive_constants(const DriftModel& model, const InitDensity& init);

struct CommandOutcome {
  nlohmann::json report;
  bool pass = true;
  /// file name -> contents, written under --out.
  std::map<std::string, std::string> artifacts;
  std::vector<std::string> warnings;
};

CommandOutcome cmd_rate_scan(const ExperimentConfig& config);
CommandOutcome cmd_mixing_scan(const ExperimentConfig& config);
CommandOutcome cmd_verify(const ExperimentConfig& config);
CommandOutcome cmd_sample(const ExperimentConfig& config);
CommandOutcome cmd_estimate(const ExperimentConfig& config);
CommandOutcome cmd_bound_eval(const ExperimentConfig& config);

/// Exact KL(pi_hat_T || pi_T) for an affine drift from the moment oracles.
double exact_discretization_kl(const DriftModel& model, const InitDensity& init, double eta,
                               double horizon);

struct MixingMeasurement {
  double eps = 0.0;
  double eta = 0.0;
  std::optional<std::uint64_t> steps;  // empty if max_steps was reached
  double predicted = 0.0;
  double log_annotation = 0.0;
};

/// First grid index k with dist(pi_hat_{k eta}, target) <= eps along the
/// exact moment recursion, eta from the step-size rule at the KL tolerance
/// implied by the metric (KL: eps, TV: 2 eps^2, W2: rho eps^2 / 2).
MixingMeasurement measure_mixing_time(const DriftModel& model, const InitDensity& init,
                                      double eps, double rho, MixingMetric metric,
                                      double scale_constant, std::uint64_t max_steps);

/// Slope bands used as verdicts.
struct SlopeBand {
  double lo;
  double hi;
  bool contains(double v) const { return v >= lo && v <= hi; }
};
inline constexpr SlopeBand kExactKlSlope{1.85, 2.15};
inline constexpr double kExactKlMinR2 = 0.999;
inline constexpr SlopeBand kGirsanovSlope{0.85, 1.15};
inline constexpr double kMinSlopeGap = 0.7;
inline constexpr SlopeBand kMixingKlSlope{-0.75, -0.40};
inline constexpr SlopeBand kMixingInverseSlope{-1.3, -0.8};

}  // namespace langevin
