#include "langevin/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kdtree.hpp"
#include "langevin/errors.hpp"
#include "langevin/noise.hpp"
#include "parallel.hpp"

namespace langevin {

KnnKlEstimate knn_kl(const PointMatrix& p, const PointMatrix& q, int k) {
  if (p.cols() != q.cols()) throw InputError("knn_kl: dimension mismatch");
  if (p.rows() < 100 || q.rows() < 100) throw InputError("knn_kl: need at least 100 samples per side");
  if (k < 1) throw InputError("knn_kl: k must be at least 1");
  const auto n = static_cast<std::size_t>(p.rows());
  const auto m = static_cast<std::size_t>(q.rows());
  const int d = static_cast<int>(p.cols());

  const detail::KdTree within(p.data(), n, d);
  const detail::KdTree across(q.data(), m, d);

  KnnKlEstimate est;
  double log_ratio_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = p.data() + i * static_cast<std::size_t>(d);
    double rho = within.kth_distance(x, k, i);
    double nu = across.kth_distance(x, k);
    if (rho <= 0.0) rho = kKnnJitter, ++est.zero_distances;
    if (nu <= 0.0) nu = kKnnJitter, ++est.zero_distances;
    log_ratio_sum += std::log(nu / rho);
  }
  est.value = static_cast<double>(d) / static_cast<double>(n) * log_ratio_sum +
              std::log(static_cast<double>(m) / static_cast<double>(n - 1));
  if (est.zero_distances > 0) {
    std::ostringstream msg;
    msg << "knn_kl: " << est.zero_distances << " zero neighbor distances floored at "
        << kKnnJitter << " (duplicate points)";
    est.warnings.push_back(msg.str());
  }
  return est;
}

KnnKlEstimate knn_kl(const SampleEnsemble& p, const SampleEnsemble& q, int k) {
  return knn_kl(p.points, q.points, k);
}

double w2_empirical_1d(const PointMatrix& p, const PointMatrix& q) {
  if (p.cols() != 1 || q.cols() != 1) throw UnsupportedError("w2_empirical_1d: dimension must be 1");
  if (p.rows() != q.rows() || p.rows() == 0) throw InputError("w2_empirical_1d: need equal, nonzero sample counts");
  std::vector<double> a(p.data(), p.data() + p.rows());
  std::vector<double> b(q.data(), q.data() + q.rows());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum / static_cast<double>(a.size()));
}

double w2_empirical_1d(const SampleEnsemble& p, const SampleEnsemble& q) {
  return w2_empirical_1d(p.points, q.points);
}

double tv_histogram(const PointMatrix& p, const PointMatrix& q, int bins_per_dim) {
  const auto d = p.cols();
  if (d != q.cols()) throw InputError("tv_histogram: dimension mismatch");
  if (d < 1 || d > 2) throw UnsupportedError("tv_histogram: dimension must be 1 or 2");
  if (bins_per_dim < 1) throw InputError("tv_histogram: need at least one bin");
  if (p.rows() == 0 || q.rows() == 0) throw InputError("tv_histogram: empty sample");

  std::vector<double> lo(d), width(d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const auto cp = p.col(a), cq = q.col(a);
    const double total = static_cast<double>(p.rows() + q.rows());
    const double mean = (cp.sum() + cq.sum()) / total;
    const double var = ((cp.array() - mean).square().sum() + (cq.array() - mean).square().sum()) / total;
    const double sd = std::sqrt(var);
    const double mn = std::max(std::min(cp.minCoeff(), cq.minCoeff()), mean - 6.0 * sd);
    const double mx = std::min(std::max(cp.maxCoeff(), cq.maxCoeff()), mean + 6.0 * sd);
    lo[a] = mn;
    width[a] = mx > mn ? (mx - mn) / bins_per_dim : 1.0;
  }
  const std::size_t cells = d == 1 ? bins_per_dim : static_cast<std::size_t>(bins_per_dim) * bins_per_dim;
  auto bin_of = [&](const PointMatrix& s, Eigen::Index row) {
    std::size_t cell = 0;
    for (Eigen::Index a = 0; a < d; ++a) {
      const double pos = std::floor((s(row, a) - lo[a]) / width[a]);
      const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins_per_dim - 1)));
      cell = cell * static_cast<std::size_t>(bins_per_dim) + b;
    }
    return cell;
  };
  std::vector<double> hp(cells, 0.0), hq(cells, 0.0);
  for (Eigen::Index i = 0; i < p.rows(); ++i) hp[bin_of(p, i)] += 1.0;
  for (Eigen::Index i = 0; i < q.rows(); ++i) hq[bin_of(q, i)] += 1.0;
  const double np = static_cast<double>(p.rows()), nq = static_cast<double>(q.rows());
  double tv = 0.0;
  for (std::size_t c = 0; c < cells; ++c) tv += std::abs(hp[c] / np - hq[c] / nq);
  return std::clamp(0.5 * tv, 0.0, 1.0);
}

double tv_histogram(const SampleEnsemble& p, const SampleEnsemble& q, int bins_per_dim) {
  return tv_histogram(p.points, q.points, bins_per_dim);
}

double moment_estimate(const PointMatrix& samples, int order) {
  if (order != 1 && order != 2 && order != 4) throw InputError("moment order must be 1, 2 or 4");
  if (samples.rows() == 0) throw InputError("moment_estimate: empty sample");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const double r2 = samples.row(i).squaredNorm();
    sum += order == 1 ? std::sqrt(r2) : order == 2 ? r2 : r2 * r2;
  }
  return sum / static_cast<double>(samples.rows());
}

double moment_estimate(const SampleEnsemble& samples, int order) {
  return moment_estimate(samples.points, order);
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw InputError("rate_fit: need at least 3 points");
  RateFit fit;
  fit.points = points;
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [eta, value] : points) {
    if (!(eta > 0.0) || !(value > 0.0)) throw InputError("rate_fit: eta and value must be positive");
    sx += std::log(eta);
    sy += std::log(value);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [eta, value] : points) {
    const double dx = std::log(eta) - mx, dy = std::log(value) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw InputError("rate_fit: all eta values are equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

double girsanov_pathwise_kl(const DriftModel& model, const InitDensity& init, double eta,
                            double horizon, std::uint64_t chains, std::uint64_t master_seed,
                            const GirsanovOptions& options) {
  check_step_window(model, eta);
  if (init.dim() != model.dim()) throw ConfigError("init dimension does not match model");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (chains == 0) throw ConfigError("need at least one chain");
  const int J = options.quad_points_per_step;
  if (J < 1) throw ConfigError("quad_points_per_step must be at least 1");
  const std::uint64_t steps = grid_steps(horizon, eta);
  if (steps == 0) throw ConfigError("horizon shorter than one step");

  const int d = model.dim();
  const CounterNormals normals(master_seed);
  const double sqrt_eta = std::sqrt(eta);
  const double weight = eta / J;
  std::vector<double> per_chain(chains, 0.0);

  detail::for_chain_blocks(chains, options.threads, [&](std::uint64_t begin, std::uint64_t end) {
    Vector x(d), xi(d), bx(d), xt(d);
    for (std::uint64_t chain = begin; chain < end; ++chain) {
      normals.fill({xi.data(), static_cast<std::size_t>(d)}, chain, 0, NoiseStream::kInit);
      x = init.mean + init.sigma * xi;
      double acc = 0.0;
      for (std::uint64_t k = 0; k < steps; ++k) {
        bx = model.eval(x);
        for (int j = 0; j < J; ++j) {
          const double tau = (j + 0.5) * eta / J;
          if (options.zero_noise) {
            xi.setZero();
          } else {
            normals.fill({xi.data(), static_cast<std::size_t>(d)}, chain, k,
                         NoiseStream::kInterpolation, static_cast<std::uint32_t>(j));
          }
          // interpolated_sample with b(x) reused across the nodes.
          xt.noalias() = x + tau * bx + std::sqrt(tau) * xi;
          acc += weight * (bx - model.eval(xt)).squaredNorm();
        }
        if (options.zero_noise) {
          xi.setZero();
        } else {
          normals.fill({xi.data(), static_cast<std::size_t>(d)}, chain, k, NoiseStream::kStep);
        }
        x += eta * bx + sqrt_eta * xi;
        bool bad = false;
        for (int a = 0; a < d; ++a) bad = bad || !std::isfinite(x(a)) || std::abs(x(a)) > kDivergenceThreshold;
        if (bad) {
          std::ostringstream msg;
          msg << "chain " << chain << " diverged at step " << k + 1;
          throw DivergenceError(msg.str(), chain, k + 1, {x.data(), x.data() + d});
        }
      }
      per_chain[chain] = acc;
    }
  });

  double total = 0.0;
  for (double v : per_chain) total += v;
  return 0.5 * total / static_cast<double>(chains);
}

}  // namespace langevin
