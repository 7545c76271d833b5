#include "langevin/samplers.hpp"

#include <cmath>
#include <sstream>

#include "langevin/errors.hpp"
#include "langevin/noise.hpp"
#include "parallel.hpp"

namespace langevin {

namespace {

bool diverged(const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i)) || std::abs(x(i)) > kDivergenceThreshold) return true;
  }
  return false;
}

std::vector<double> to_std(const Vector& x) { return {x.data(), x.data() + x.size()}; }

[[noreturn]] void throw_divergence(std::uint64_t chain, std::uint64_t step, const Vector& x) {
  std::ostringstream msg;
  msg << "chain " << chain << " diverged at step " << step;
  throw DivergenceError(msg.str(), chain, step, to_std(x));
}

}  // namespace

Vector em_step(const Vector& x, const DriftModel& model, double eta, const Vector& noise) {
  if (!(eta > 0.0)) throw InputError("step size must be positive");
  if (noise.size() != x.size()) throw InputError("noise dimension mismatch");
  Vector next;
  try {
    next = x + eta * model.eval(x) + std::sqrt(eta) * noise;
  } catch (const ModelError&) {
    throw_divergence(0, 0, x);
  }
  if (diverged(next)) throw_divergence(0, 0, next);
  return next;
}

Vector interpolated_sample(const Vector& x_grid, const DriftModel& model, double tau,
                           double eta, const Vector& noise) {
  if (!(tau >= 0.0 && tau <= eta)) throw InputError("interpolation offset outside [0, eta]");
  if (noise.size() != x_grid.size()) throw InputError("noise dimension mismatch");
  return x_grid + tau * model.eval(x_grid) + std::sqrt(tau) * noise;
}

void check_step_window(const DriftModel& model, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("step size must be positive");
  const double L1 = model.constants().L1;
  if (L1 > 0.0 && !(eta < 1.0 / (2.0 * L1))) {
    std::ostringstream msg;
    msg << "step size " << eta << " outside the window (0, " << 1.0 / (2.0 * L1)
        << ") = (0, 1/(2 L1)) for L1 = " << L1;
    throw ConfigError(msg.str());
  }
}

std::uint64_t grid_steps(double horizon, double eta) {
  const double ratio = horizon / eta;
  return static_cast<std::uint64_t>(std::floor(ratio * (1.0 + 1e-12) + 1e-9));
}

SimulationResult simulate_ensemble(const DriftModel& model, const InitDensity& init,
                                   double eta, double horizon, std::uint64_t chains,
                                   std::uint64_t master_seed,
                                   const SimulationOptions& options) {
  check_step_window(model, eta);
  if (init.dim() != model.dim()) throw ConfigError("init dimension does not match model");
  if (!(init.sigma > 0.0)) throw ConfigError("init sigma must be positive");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (chains == 0) throw ConfigError("need at least one chain");

  SimulationResult result;
  const std::uint64_t steps = grid_steps(horizon, eta);
  if (steps == 0) throw ConfigError("horizon shorter than one step");
  if (std::abs(static_cast<double>(steps) * eta - horizon) > 1e-9 * horizon) {
    std::ostringstream msg;
    msg << "horizon " << horizon << " is not a multiple of eta; rounded down to "
        << static_cast<double>(steps) * eta;
    result.warnings.push_back(msg.str());
  }

  std::vector<std::uint64_t> snap_steps;
  for (double t : options.snapshot_times) {
    if (!(t >= 0.0)) throw ConfigError("snapshot time must be nonnegative");
    const auto k = static_cast<std::uint64_t>(std::llround(t / eta));
    if (k > steps) throw ConfigError("snapshot time beyond the horizon");
    snap_steps.push_back(k);
  }

  const int d = model.dim();
  auto blank = [&](std::uint64_t k) {
    SampleEnsemble e;
    e.time = static_cast<double>(k) * eta;
    e.eta = eta;
    e.points.resize(static_cast<Eigen::Index>(chains), d);
    e.master_seed = master_seed;
    return e;
  };
  result.final = blank(steps);
  for (auto k : snap_steps) result.snapshots.push_back(blank(k));

  const CounterNormals normals(master_seed);
  const double sqrt_eta = std::sqrt(eta);

  detail::for_chain_blocks(chains, options.threads, [&](std::uint64_t begin, std::uint64_t end) {
    Vector x(d), xi(d);
    for (std::uint64_t chain = begin; chain < end; ++chain) {
      const auto row = static_cast<Eigen::Index>(chain);
      normals.fill({xi.data(), static_cast<std::size_t>(d)}, chain, 0, NoiseStream::kInit);
      x = init.mean + init.sigma * xi;
      for (std::size_t s = 0; s < snap_steps.size(); ++s) {
        if (snap_steps[s] == 0) result.snapshots[s].points.row(row) = x.transpose();
      }
      for (std::uint64_t k = 0; k < steps; ++k) {
        normals.fill({xi.data(), static_cast<std::size_t>(d)}, chain, k, NoiseStream::kStep);
        try {
          x += eta * model.eval(x) + sqrt_eta * xi;
        } catch (const ModelError&) {
          throw_divergence(chain, k + 1, x);
        }
        if (diverged(x)) throw_divergence(chain, k + 1, x);
        for (std::size_t s = 0; s < snap_steps.size(); ++s) {
          if (snap_steps[s] == k + 1) result.snapshots[s].points.row(row) = x.transpose();
        }
      }
      result.final.points.row(row) = x.transpose();
    }
  });
  return result;
}

SimulationResult fine_reference_ensemble(const DriftModel& model, const InitDensity& init,
                                         double eta_fine, double eta_coarse,
                                         double horizon, std::uint64_t chains,
                                         std::uint64_t master_seed,
                                         const SimulationOptions& options) {
  if (!(eta_fine > 0.0) || !(eta_fine <= eta_coarse / 32.0 * (1.0 + 1e-12))) {
    throw ConfigError("reference step must satisfy eta_fine <= eta_coarse / 32");
  }
  SimulationResult result =
      simulate_ensemble(model, init, eta_fine, horizon, chains, master_seed, options);
  result.final.tag = "reference";
  for (auto& s : result.snapshots) s.tag = "reference";
  return result;
}

SampleEnsemble interpolate_ensemble(const DriftModel& model, const SampleEnsemble& grid,
                                    double tau, int threads) {
  if (grid.dim() != model.dim()) throw InputError("ensemble dimension does not match model");
  const auto step = static_cast<std::uint64_t>(std::llround(grid.time / grid.eta));
  const CounterNormals normals(grid.master_seed);
  const int d = model.dim();
  SampleEnsemble out = grid;
  out.time = grid.time + tau;
  detail::for_chain_blocks(grid.chain_count(), threads, [&](std::uint64_t begin, std::uint64_t end) {
    Vector xi(d);
    for (std::uint64_t chain = begin; chain < end; ++chain) {
      const auto row = static_cast<Eigen::Index>(chain);
      normals.fill({xi.data(), static_cast<std::size_t>(d)}, chain, step,
                   NoiseStream::kInterpolation);
      const Vector x = grid.points.row(row).transpose();
      out.points.row(row) = interpolated_sample(x, model, tau, grid.eta, xi).transpose();
    }
  });
  return out;
}

}  // namespace langevin
