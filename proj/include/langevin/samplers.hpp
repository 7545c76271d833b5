#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "langevin/drift_models.hpp"
#include "langevin/init_density.hpp"

namespace langevin {

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n chain states at one grid time. Row i belongs to chain i.
struct SampleEnsemble {
  double time = 0.0;
  double eta = 0.0;
  PointMatrix points;
  std::uint64_t master_seed = 0;
  std::string tag = "sample";  // "sample" or "reference"

  std::uint64_t chain_count() const { return static_cast<std::uint64_t>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

struct SimulationOptions {
  /// Extra grid times to record; each is rounded to the nearest grid index.
  std::vector<double> snapshot_times;
  /// Worker threads. Affects speed only.
  int threads = 1;
};

struct SimulationResult {
  SampleEnsemble final;
  std::vector<SampleEnsemble> snapshots;
  std::vector<std::string> warnings;
};

/// States with any |coordinate| above this abort the chain.
inline constexpr double kDivergenceThreshold = 1e12;

/// x + eta b(x) + sqrt(eta) noise. Throws DivergenceError (chain and step
/// reported as 0) when the result is non-finite or exceeds the threshold.
Vector em_step(const Vector& x, const DriftModel& model, double eta, const Vector& noise);

/// x_grid + tau b(x_grid) + sqrt(tau) noise, 0 <= tau <= eta.
Vector interpolated_sample(const Vector& x_grid, const DriftModel& model, double tau,
                           double eta, const Vector& noise);

/// Throws ConfigError unless 0 < eta < 1 / (2 L1).
void check_step_window(const DriftModel& model, double eta);

/// Number of Euler steps for horizon T: floor(T / eta), tolerant to rounding.
std::uint64_t grid_steps(double horizon, double eta);

/// n independent Euler-Maruyama chains run to floor(T / eta) steps. Noise
/// for (chain, step) comes from a counter-based stream keyed by master_seed.
SimulationResult simulate_ensemble(const DriftModel& model, const InitDensity& init,
                                   double eta, double horizon, std::uint64_t chains,
                                   std::uint64_t master_seed,
                                   const SimulationOptions& options = {});

/// simulate_ensemble at a fine step, tagged "reference". Requires
/// eta_fine <= eta_coarse / 32. Its own KL bias is O(eta_fine^2).
SimulationResult fine_reference_ensemble(const DriftModel& model, const InitDensity& init,
                                         double eta_fine, double eta_coarse,
                                         double horizon, std::uint64_t chains,
                                         std::uint64_t master_seed,
                                         const SimulationOptions& options = {});

/// Applies interpolated_sample at offset tau to every chain of a grid
/// ensemble, drawing from the interpolation stream at the ensemble's step.
SampleEnsemble interpolate_ensemble(const DriftModel& model, const SampleEnsemble& grid,
                                    double tau, int threads = 1);

}  // namespace langevin
