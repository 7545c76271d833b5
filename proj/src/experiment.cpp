#include "langevin/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "langevin/errors.hpp"
#include "langevin/gaussian.hpp"
#include "langevin/io.hpp"
#include "langevin/noise.hpp"
#include "langevin/samplers.hpp"

namespace langevin {

using nlohmann::json;

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

template <typename T>
void read_opt(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& dst) {
  if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

json base_report(const std::string& command, const ExperimentConfig& config,
                 double c0 = 1.0, double c1 = 1.0) {
  json r;
  r["command"] = command;
  r["binary_version"] = kBinaryVersion;
  r["config_hash"] = config.hash();
  r["master_seed"] = config.seed;
  r["c0"] = c0;
  r["c1"] = c1;
  return r;
}

void set_verdict(CommandOutcome& out, bool pass, const std::string& line) {
  out.pass = pass;
  out.report["verdict"] = {{"pass", pass}, {"line", line + (pass ? ": PASS" : ": FAIL")}};
}

json fit_json(const RateFit& fit) {
  json pts = json::array();
  for (const auto& [x, y] : fit.points) pts.push_back({x, y});
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared},
          {"points", pts}};
}

LinearDrift linear_of(const DriftModel& model) {
  const auto affine = model.affine_form();
  if (!affine) throw ConfigError("model " + model.name() + " is not affine; no exact Gaussian oracle");
  return {affine->first, affine->second};
}

GaussianMoments init_moments(const InitDensity& init) {
  return GaussianMoments::isotropic(init.mean, init.sigma * init.sigma);
}

bool all_zero(const std::vector<std::pair<double, double>>& pts) {
  return std::all_of(pts.begin(), pts.end(), [](const auto& p) { return std::abs(p.second) <= 1e-14; });
}

}  // namespace

// Config ---------------------------------------------------------------------

json ExperimentConfig::to_json() const {
  json j;
  j["model"] = {{"name", model}, {"params", model_params}};
  j["init"] = {{"mean", init_mean}, {"sigma", init_sigma}, {"family", "gaussian"}};
  j["eta"] = eta ? json(*eta) : json(nullptr);
  j["eta_grid"] = eta_grid;
  j["horizon"] = horizon;
  j["chains"] = chains;
  j["seed"] = seed;
  j["snapshot_times"] = snapshot_times;
  j["estimators"] = estimators;
  j["knn_k"] = knn_k;
  j["tv_bins"] = tv_bins;
  j["quad_points"] = quad_points;
  j["moment_orders"] = moment_orders;
  j["p"] = p_path;
  j["q"] = q_path;
  j["exact"] = exact;
  j["girsanov"] = girsanov;
  j["rho"] = rho ? json(*rho) : json(nullptr);
  j["eps_grid"] = eps_grid;
  j["metric"] = metric;
  j["scale_constant"] = scale_constant;
  j["max_steps"] = max_steps;
  j["theorem"] = theorem;
  j["dim"] = dim ? json(*dim) : json(nullptr);
  j["constants"] = constants;
  j["constants_file"] = constants_file;
  j["verify_radius"] = verify_radius;
  j["threads"] = threads;
  j["output"] = output;
  return j;
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  // Neither affects results.
  j.erase("threads");
  j.erase("output");
  return fnv1a_hex(j.dump());
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  static const std::set<std::string> known{
      "model", "init", "eta", "eta_grid", "horizon", "chains", "seed", "snapshot_times",
      "estimators", "knn_k", "tv_bins", "quad_points", "moment_orders", "p", "q", "exact",
      "girsanov", "rho", "eps_grid", "metric", "scale_constant", "max_steps", "theorem", "dim",
      "constants", "constants_file", "verify_radius", "threads", "output"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key: " + key);
  }
  ExperimentConfig c;
  try {
    if (j.contains("model")) {
      const json& m = j["model"];
      if (m.is_string()) {
        c.model = m.get<std::string>();
      } else {
        c.model = m.at("name").get<std::string>();
        if (m.contains("params")) c.model_params = m["params"];
      }
    }
    if (j.contains("init")) {
      const json& in = j["init"];
      const std::string family = in.value("family", "gaussian");
      if (family != "gaussian") throw UnsupportedError("only Gaussian initializations are supported");
      read_opt(in, "mean", c.init_mean);
      read_opt(in, "sigma", c.init_sigma);
    }
    read_opt(j, "eta", c.eta);
    read_opt(j, "eta_grid", c.eta_grid);
    read_opt(j, "horizon", c.horizon);
    read_opt(j, "chains", c.chains);
    read_opt(j, "seed", c.seed);
    read_opt(j, "snapshot_times", c.snapshot_times);
    read_opt(j, "estimators", c.estimators);
    read_opt(j, "knn_k", c.knn_k);
    read_opt(j, "tv_bins", c.tv_bins);
    read_opt(j, "quad_points", c.quad_points);
    read_opt(j, "moment_orders", c.moment_orders);
    read_opt(j, "p", c.p_path);
    read_opt(j, "q", c.q_path);
    read_opt(j, "exact", c.exact);
    read_opt(j, "girsanov", c.girsanov);
    read_opt(j, "rho", c.rho);
    read_opt(j, "eps_grid", c.eps_grid);
    read_opt(j, "metric", c.metric);
    read_opt(j, "scale_constant", c.scale_constant);
    read_opt(j, "max_steps", c.max_steps);
    read_opt(j, "theorem", c.theorem);
    read_opt(j, "dim", c.dim);
    read_opt(j, "constants", c.constants);
    read_opt(j, "constants_file", c.constants_file);
    read_opt(j, "verify_radius", c.verify_radius);
    read_opt(j, "threads", c.threads);
    read_opt(j, "output", c.output);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  ExperimentConfig c = from_json(j);
  // Relative data paths resolve against the config's directory.
  const auto base = path.parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
  };
  resolve(c.p_path);
  resolve(c.q_path);
  resolve(c.constants_file);
  return c;
}

DriftModelPtr ExperimentConfig::build_model() const { return make_model(model, model_params); }

InitDensity ExperimentConfig::build_init(int dim_) const {
  InitDensity init;
  if (init_mean.empty()) {
    init.mean = Vector::Zero(dim_);
  } else {
    init.mean = Eigen::Map<const Vector>(init_mean.data(), static_cast<Eigen::Index>(init_mean.size()));
  }
  if (init.dim() != dim_) throw ConfigError("init mean dimension does not match the model");
  if (!(init_sigma > 0.0)) throw ConfigError("init sigma must be positive");
  init.sigma = init_sigma;
  return init;
}

BoundConstants parse_constants(const json& j) {
  if (!j.is_object()) throw ConfigError("constants must be a JSON object");
  std::vector<std::string> missing;
  for (const char* name : {"L1", "L2", "A0", "sigma0", "h0", "entropy0"}) {
    if (!j.contains(name)) missing.emplace_back(name);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ConfigError("missing constants: " + list);
  }
  BoundConstants c;
  try {
    c.L1 = j.at("L1").get<double>();
    c.L2 = j.at("L2").get<double>();
    c.A0 = j.at("A0").get<double>();
    c.sigma0 = j.at("sigma0").get<double>();
    c.h0 = j.at("h0").get<double>();
    c.entropy0 = j.at("entropy0").get<double>();
    read_opt(j, "mu", c.mu);
    read_opt(j, "beta", c.beta);
    read_opt(j, "rho", c.rho);
    read_opt(j, "f0", c.f0);
    read_opt(j, "c0", c.c0);
    read_opt(j, "c1", c.c1);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad constants value: ") + e.what());
  }
  try {
    c.validate();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

BoundConstants derive_constants(const DriftModel& model, const InitDensity& init) {
  const auto& cert = model.constants();
  const InitCertificate ic = verify_init(init);
  BoundConstants c;
  c.L1 = cert.L1;
  c.L2 = cert.L2;
  c.A0 = cert.A0;
  if (cert.dissipativity) {
    c.mu = cert.dissipativity->mu;
    c.beta = cert.dissipativity->beta;
  }
  c.sigma0 = ic.sigma0;
  c.h0 = ic.h0;
  c.entropy0 = init.entropy();
  if (cert.potential_floor) {
    if (auto f_origin = model.potential(Vector::Zero(model.dim()))) {
      c.f0 = *f_origin - *cert.potential_floor;
    }
  }
  return c;
}

// Oracles --------------------------------------------------------------------

double exact_discretization_kl(const DriftModel& model, const InitDensity& init, double eta,
                               double horizon) {
  const LinearDrift drift = linear_of(model);
  const std::uint64_t steps = grid_steps(horizon, eta);
  const GaussianMoments start = init_moments(init);
  const GaussianMoments discrete = em_moments_linear(drift, start, eta, steps);
  const GaussianMoments continuous =
      continuous_moments_linear(drift, start, static_cast<double>(steps) * eta);
  return kl_gaussian(discrete, continuous);
}

MixingMeasurement measure_mixing_time(const DriftModel& model, const InitDensity& init,
                                      double eps, double rho, MixingMetric metric,
                                      double scale_constant, std::uint64_t max_steps) {
  const LinearDrift drift = linear_of(model);
  const GaussianMoments target = stationary_moments(drift);
  const int d = model.dim();
  if (metric == MixingMetric::kW1) throw ConfigError("mixing scan supports KL, TV and W2");
  if (metric == MixingMetric::kTV && d != 1) throw ConfigError("TV mixing scan is 1D only");

  double eps_kl = eps;
  if (metric == MixingMetric::kTV) eps_kl = 2.0 * eps * eps;
  if (metric == MixingMetric::kW2) eps_kl = rho * eps * eps / 2.0;

  MixingMeasurement out;
  out.eps = eps;
  out.eta = step_size_corollary(eps_kl, rho, d);
  const auto pred = mixing_time_predict(eps, rho, d, metric, scale_constant);
  out.predicted = pred.steps;
  out.log_annotation = pred.log_annotation;

  auto dist = [&](const GaussianMoments& m) {
    switch (metric) {
      case MixingMetric::kKL: return kl_gaussian(m, target);
      case MixingMetric::kTV: return tv_gaussian_1d(m, target);
      default: return w2_gaussian(m, target);
    }
  };
  const Matrix F = Matrix::Identity(d, d) + out.eta * drift.A;
  const Vector shift = out.eta * drift.c;
  const Matrix noise = out.eta * Matrix::Identity(d, d);
  GaussianMoments m = init_moments(init);
  if (dist(m) <= eps) {
    out.steps = 0;
    return out;
  }
  // Only a run that actually steps needs the step inside the window.
  check_step_window(model, out.eta);
  for (std::uint64_t k = 0; k <= max_steps; ++k) {
    if (dist(m) <= eps) {
      out.steps = k;
      return out;
    }
    m.mean = F * m.mean + shift;
    m.cov = F * m.cov * F.transpose() + noise;
  }
  return out;
}

// Commands -------------------------------------------------------------------

CommandOutcome cmd_rate_scan(const ExperimentConfig& config) {
  const auto model = config.build_model();
  const InitDensity init = config.build_init(model->dim());
  if (config.eta_grid.size() < 3) throw ConfigError("rate-scan needs an eta_grid with at least 3 values");
  const bool affine = model->affine_form().has_value();
  if (config.exact && !affine) {
    throw ConfigError("model " + model->name() +
                      " has no exact Gaussian oracle; set \"exact\": false to use the "
                      "fine-reference path (knn KL against an eta/64 reference ensemble)");
  }
  for (double eta : config.eta_grid) check_step_window(*model, eta);

  CommandOutcome out;
  out.report = base_report("rate-scan", config);
  const std::string kl_column = config.exact ? "kl_exact" : "kl_reference";
  std::vector<std::pair<double, double>> kl_pts, gir_pts;
  std::ostringstream csv;
  csv << "eta," << kl_column << ",kl_girsanov\n";
  for (double eta : config.eta_grid) {
    double kl = 0.0;
    if (config.exact) {
      kl = exact_discretization_kl(*model, init, eta, config.horizon);
    } else {
      SimulationOptions opts;
      opts.threads = config.threads;
      const auto coarse = simulate_ensemble(*model, init, eta, config.horizon, config.chains,
                                            config.seed, opts);
      const auto reference = fine_reference_ensemble(*model, init, eta / 64.0, eta, config.horizon,
                                                     config.chains, config.seed + 1, opts);
      const auto est = knn_kl(coarse.final, reference.final, config.knn_k);
      kl = est.value;
      out.warnings.insert(out.warnings.end(), est.warnings.begin(), est.warnings.end());
    }
    double gir = std::nan("");
    if (config.girsanov) {
      GirsanovOptions gopts;
      gopts.quad_points_per_step = config.quad_points;
      gopts.threads = config.threads;
      gir = girsanov_pathwise_kl(*model, init, eta, config.horizon, config.chains, config.seed, gopts);
      gir_pts.emplace_back(eta, gir);
    }
    kl_pts.emplace_back(eta, kl);
    csv << format_double(eta) << ',' << format_double(kl) << ','
        << (config.girsanov ? format_double(gir) : std::string()) << '\n';
  }
  out.artifacts["rate_scan.csv"] = csv.str();

  std::vector<std::string> parts;
  bool pass = true;
  std::optional<double> kl_slope, gir_slope;
  if (all_zero(kl_pts)) {
    out.report[kl_column] = {{"all_zero", true}};
    parts.push_back("KL is zero at every eta (discretization exact)");
  } else if (std::any_of(kl_pts.begin(), kl_pts.end(), [](const auto& p) { return !(p.second > 0.0); })) {
    out.report[kl_column] = {{"fit", nullptr}};
    parts.push_back("KL estimate nonpositive at some eta; slope not fitted");
    pass = false;
  } else {
    const RateFit fit = rate_fit(kl_pts);
    out.report[kl_column] = {{"fit", fit_json(fit)}};
    kl_slope = fit.slope;
    const bool ok = kExactKlSlope.contains(fit.slope) &&
                    (!config.exact || fit.r_squared >= kExactKlMinR2);
    pass = pass && ok;
    parts.push_back("KL slope " + fmt(fit.slope) + " (r^2 " + fmt(fit.r_squared, 6) + ") in [" +
                    fmt(kExactKlSlope.lo) + ", " + fmt(kExactKlSlope.hi) + "]");
  }
  if (config.girsanov) {
    if (all_zero(gir_pts)) {
      out.report["kl_girsanov"] = {{"all_zero", true}};
      parts.push_back("girsanov quantity zero at every eta");
    } else {
      const RateFit fit = rate_fit(gir_pts);
      out.report["kl_girsanov"] = {{"fit", fit_json(fit)}};
      gir_slope = fit.slope;
      pass = pass && kGirsanovSlope.contains(fit.slope);
      parts.push_back("girsanov slope " + fmt(fit.slope) + " in [" + fmt(kGirsanovSlope.lo) + ", " +
                      fmt(kGirsanovSlope.hi) + "]");
    }
  }
  if (kl_slope && gir_slope) {
    const double gap = *kl_slope - *gir_slope;
    out.report["slope_gap"] = gap;
    pass = pass && gap >= kMinSlopeGap;
    parts.push_back("slope gap " + fmt(gap) + " >= " + fmt(kMinSlopeGap));
  }
  std::string line;
  for (const auto& p : parts) line += (line.empty() ? "" : "; ") + p;
  out.report["horizon"] = config.horizon;
  out.report["chains"] = config.chains;
  out.report["warnings"] = out.warnings;
  set_verdict(out, pass, line);
  return out;
}

CommandOutcome cmd_mixing_scan(const ExperimentConfig& config) {
  if (!config.rho) throw ConfigError("mixing-scan needs the log-Sobolev constant \"rho\"");
  if (config.eps_grid.empty()) throw ConfigError("mixing-scan needs a nonempty eps_grid");
  const auto model = config.build_model();
  if (!model->affine_form()) throw ConfigError("mixing-scan needs a Gaussian target (affine drift)");
  const InitDensity init = config.build_init(model->dim());
  MixingMetric metric;
  try {
    metric = parse_metric(config.metric);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }

  CommandOutcome out;
  out.report = base_report("mixing-scan", config);
  std::ostringstream csv;
  csv << "eps,eta_used,n_measured,n_predicted\n";
  std::vector<std::pair<double, double>> pts;
  json rows = json::array();
  bool all_reached = true;
  for (double eps : config.eps_grid) {
    const auto m = measure_mixing_time(*model, init, eps, *config.rho, metric,
                                       config.scale_constant, config.max_steps);
    csv << format_double(eps) << ',' << format_double(m.eta) << ','
        << (m.steps ? std::to_string(*m.steps) : std::string()) << ',' << format_double(m.predicted)
        << '\n';
    rows.push_back({{"eps", eps},
                    {"eta", m.eta},
                    {"n_measured", m.steps ? json(*m.steps) : json(nullptr)},
                    {"n_predicted", m.predicted},
                    {"log_annotation", m.log_annotation}});
    if (!m.steps) all_reached = false;
    if (m.steps && *m.steps > 0) pts.emplace_back(eps, static_cast<double>(*m.steps));
  }
  out.artifacts["mixing_scan.csv"] = csv.str();
  out.report["rows"] = rows;
  out.report["metric"] = metric_name(metric);
  out.report["rho"] = *config.rho;
  out.report["scale_constant"] = config.scale_constant;
  out.report["log_factors"] = "reported as log(1/eps) log(1/rho) annotations, not multiplied in";

  const SlopeBand band = metric == MixingMetric::kKL ? kMixingKlSlope : kMixingInverseSlope;
  if (!all_reached) {
    set_verdict(out, false, "some eps not reached within max_steps = " + std::to_string(config.max_steps));
  } else if (pts.size() < 3) {
    out.report["fit"] = nullptr;
    set_verdict(out, true, "fewer than 3 positive mixing times; slope not fitted");
  } else {
    const RateFit fit = rate_fit(pts);
    out.report["fit"] = fit_json(fit);
    set_verdict(out, band.contains(fit.slope),
                metric_name(metric) + " mixing-time slope in eps " + fmt(fit.slope) + " in [" +
                    fmt(band.lo) + ", " + fmt(band.hi) + "]");
  }
  return out;
}

CommandOutcome cmd_verify(const ExperimentConfig& config) {
  const auto model = config.build_model();
  const InitDensity init = config.build_init(model->dim());
  const auto& cert = model->constants();
  const int d = model->dim();
  const double radius = cert.radius ? std::min(config.verify_radius, *cert.radius) : config.verify_radius;

  CommandOutcome out;
  out.report = base_report("verify", config);
  out.report["model"] = model->name();
  json assumptions;

  const LipschitzReport lip = lipschitz_check(*model, 100, radius, config.seed);
  json a1 = {{"pass", lip.l1_ok}, {"declared_L1", cert.L1}, {"max_observed_ratio", lip.max_L1_ratio},
             {"sample_radius", radius}};
  if (!lip.l1_ok) a1["witness"] = {to_std(lip.l1_witness_x), to_std(lip.l1_witness_y)};
  if (cert.radius) a1["certified_radius"] = *cert.radius;
  assumptions["lipschitz_drift"] = a1;

  const CounterNormals normals(config.seed ^ 0xA5A5A5A5ull);
  double worst_grad = 0.0;
  for (int i = 0; i < 20; ++i) {
    Vector x(d);
    normals.fill({x.data(), static_cast<std::size_t>(d)}, static_cast<std::uint64_t>(i), 0,
                 NoiseStream::kAuxiliary);
    if (x.norm() > radius) x *= radius / x.norm();
    worst_grad = std::max(worst_grad, grad_check(*model, x, 1e-5));
  }
  const bool grad_ok = worst_grad < 1e-5;
  json a2 = {{"pass", lip.l2_ok && grad_ok}, {"declared_L2", cert.L2},
             {"max_observed_ratio", lip.max_L2_ratio}, {"grad_check_max_error", worst_grad}};
  if (!lip.l2_ok) a2["witness"] = {to_std(lip.l2_witness_x), to_std(lip.l2_witness_y)};
  assumptions["smooth_drift"] = a2;

  std::vector<double> radii;
  const int shells = 400;
  for (int i = 1; i <= shells; ++i) radii.push_back(config.verify_radius * i / shells);
  const DissipativityFit fit = dissipativity_fit(*model, radii, 16, config.seed);
  json a3;
  if (fit.constants) {
    a3["fit"] = {{"mu", fit.constants->mu}, {"beta", fit.constants->beta}};
  } else {
    a3["fit"] = nullptr;
  }
  if (cert.dissipativity) {
    const auto violation =
        check_dissipativity(*model, *cert.dissipativity, 10000, config.verify_radius, config.seed);
    a3["pass"] = !violation.has_value();
    a3["mu"] = cert.dissipativity->mu;
    a3["beta"] = cert.dissipativity->beta;
    a3["source"] = "declared";
    if (violation) a3["witness"] = to_std(*violation);
  } else if (fit.constants) {
    a3["pass"] = true;
    a3["mu"] = fit.constants->mu;
    a3["beta"] = fit.constants->beta;
    a3["source"] = "fit";
  } else {
    a3["pass"] = false;
    a3["source"] = "fit";
    a3["witness"] = to_std(fit.witness);
    a3["witness_value"] = fit.witness_value;
  }
  assumptions["dissipativity"] = a3;

  const InitCertificate ic = verify_init(init);
  const double check_radius = config.verify_radius + init.mean.norm();
  bool init_ok = true;
  json a4;
  for (int i = 0; i < 10000 && init_ok; ++i) {
    Vector x(d);
    normals.fill({x.data(), static_cast<std::size_t>(d)}, static_cast<std::uint64_t>(i), 1,
                 NoiseStream::kAuxiliary);
    const double u = normals.uniform(static_cast<std::uint64_t>(i), 2, NoiseStream::kAuxiliary);
    x *= check_radius * std::pow(u, 1.0 / d) / std::max(x.norm(), 1e-300);
    const double lhs = init.neg_log_density(x);
    const double rhs = ic.h0 + x.squaredNorm() / (ic.sigma0 * ic.sigma0);
    if (lhs > rhs + 1e-9 * (1.0 + std::abs(rhs))) {
      init_ok = false;
      a4["witness"] = to_std(x);
    }
  }
  a4["pass"] = init_ok;
  a4["h0"] = ic.h0;
  a4["sigma0"] = ic.sigma0;
  a4["entropy"] = init.entropy();
  assumptions["smooth_initialization"] = a4;

  out.report["assumptions"] = assumptions;
  std::string failed;
  for (const auto& [name, a] : assumptions.items()) {
    if (!a.at("pass").get<bool>()) failed += (failed.empty() ? "" : ", ") + name;
  }
  set_verdict(out, failed.empty(),
              failed.empty() ? "all four assumptions hold on the sampled points" : "failed: " + failed);
  return out;
}

CommandOutcome cmd_sample(const ExperimentConfig& config) {
  if (!config.eta) throw ConfigError("sample needs \"eta\"");
  const auto model = config.build_model();
  const InitDensity init = config.build_init(model->dim());
  const double L1 = model->constants().L1;

  SimulationOptions opts;
  opts.snapshot_times = config.snapshot_times;
  opts.threads = config.threads;
  const SimulationResult result =
      simulate_ensemble(*model, init, *config.eta, config.horizon, config.chains, config.seed, opts);

  std::vector<const SampleEnsemble*> order;
  for (const auto& s : result.snapshots) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->time < b->time; });
  order.erase(std::unique(order.begin(), order.end(),
                          [](const auto* a, const auto* b) { return a->time == b->time; }),
              order.end());
  if (order.empty() || order.back()->time != result.final.time) order.push_back(&result.final);

  CommandOutcome out;
  out.artifacts["ensemble.csv"] = ensembles_to_csv(order);
  out.warnings = result.warnings;
  out.report = base_report("sample", config);
  out.report["model"] = {{"name", model->name()}, {"params", config.model_params}};
  out.report["eta"] = *config.eta;
  out.report["horizon"] = config.horizon;
  out.report["steps"] = grid_steps(config.horizon, *config.eta);
  out.report["chains"] = config.chains;
  out.report["step_window"] = {{"L1", L1},
                               {"upper", L1 > 0.0 ? json(1.0 / (2.0 * L1)) : json(nullptr)},
                               {"inside", true}};
  json times = json::array();
  for (const auto* e : order) times.push_back(e->time);
  out.report["times"] = times;
  out.report["tag"] = result.final.tag;
  out.report["warnings"] = result.warnings;
  set_verdict(out, true, "all chains finite");
  return out;
}

CommandOutcome cmd_estimate(const ExperimentConfig& config) {
  if (config.p_path.empty()) throw ConfigError("estimate needs a \"p\" ensemble CSV");
  const CsvEnsembles p_all = read_ensembles_csv(config.p_path);
  if (p_all.points.empty()) throw ConfigError("ensemble CSV has no rows: " + config.p_path);
  const PointMatrix& p = p_all.points.back();
  std::optional<PointMatrix> q;
  if (!config.q_path.empty()) {
    const CsvEnsembles q_all = read_ensembles_csv(config.q_path);
    if (q_all.points.empty()) throw ConfigError("ensemble CSV has no rows: " + config.q_path);
    q = q_all.points.back();
  }

  std::vector<std::string> names = config.estimators;
  if (names.empty()) {
    names.push_back("moment");
    if (q) {
      names.push_back("knn_kl");
      if (p.cols() == 1 && q->rows() == p.rows()) names.push_back("w2_empirical_1d");
      if (p.cols() <= 2) names.push_back("tv_histogram");
    }
  }

  CommandOutcome out;
  out.report = base_report("estimate", config);
  json records = json::array();
  std::ostringstream lines;
  auto emit = [&](const std::string& name, json params, double value) {
    json rec = {{"estimator", name}, {"parameters", std::move(params)}, {"value", value}};
    lines << rec.dump() << '\n';
    records.push_back(std::move(rec));
  };
  auto need_q = [&](const std::string& name) {
    if (!q) throw ConfigError(name + " needs a \"q\" ensemble CSV");
  };
  for (const auto& name : names) {
    if (name == "knn_kl") {
      need_q(name);
      const auto est = knn_kl(p, *q, config.knn_k);
      out.warnings.insert(out.warnings.end(), est.warnings.begin(), est.warnings.end());
      emit(name, {{"k", config.knn_k}, {"jitter", kKnnJitter}}, est.value);
    } else if (name == "w2_empirical_1d") {
      need_q(name);
      emit(name, json::object(), w2_empirical_1d(p, *q));
    } else if (name == "tv_histogram") {
      need_q(name);
      emit(name, {{"bins_per_dim", config.tv_bins}}, tv_histogram(p, *q, config.tv_bins));
    } else if (name == "moment") {
      for (int order : config.moment_orders) emit(name, {{"order", order}}, moment_estimate(p, order));
    } else {
      throw ConfigError("unknown estimator: " + name);
    }
  }
  out.artifacts["estimates.jsonl"] = lines.str();
  out.report["estimates"] = records;
  out.report["p"] = config.p_path;
  out.report["q"] = config.q_path;
  out.report["warnings"] = out.warnings;
  set_verdict(out, true, std::to_string(records.size()) + " estimates computed");
  return out;
}

CommandOutcome cmd_bound_eval(const ExperimentConfig& config) {
  json cj = config.constants;
  if (!config.constants_file.empty()) {
    std::ifstream f(config.constants_file);
    if (!f) throw ConfigError("cannot open constants file: " + config.constants_file);
    try {
      json file;
      f >> file;
      // Inline entries override the file.
      for (const auto& [k, v] : cj.items()) file[k] = v;
      cj = file;
    } catch (const json::exception& e) {
      throw ConfigError("constants file is not valid JSON: " + std::string(e.what()));
    }
  }
  const BoundConstants c = parse_constants(cj);
  if (!config.dim) throw ConfigError("bound-eval needs \"dim\"");
  if (config.theorem != 1 && config.theorem != 2) throw ConfigError("theorem must be 1 or 2");
  const int d = *config.dim;

  auto terms = [&](double eta) {
    try {
      return config.theorem == 1 ? kl_bound_thm1_terms(c, eta, config.horizon, d)
                                 : kl_bound_thm2_terms(c, eta, config.horizon, d);
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
  };
  auto terms_json = [](const std::vector<BoundTerm>& ts) {
    json arr = json::array();
    for (const auto& t : ts) arr.push_back({{"name", t.name}, {"value", t.value}});
    return arr;
  };

  CommandOutcome out;
  out.report = base_report("bound-eval", config, c.c0, c.c1);
  out.report["theorem"] = config.theorem;
  out.report["horizon"] = config.horizon;
  out.report["dim"] = d;
  out.report["shape_only"] = true;

  bool pass = true;
  std::string line;
  if (config.eta) {
    const BoundBreakdown b = terms(*config.eta);
    out.report["eta"] = *config.eta;
    out.report["value"] = b.total;
    out.report["top_level_terms"] = terms_json(b.top_level);
    out.report["inner_terms"] = terms_json(b.inner);
    line = "bound = " + fmt(b.total, 10);
    pass = std::isfinite(b.total) && b.total >= 0.0;
  }
  if (!config.eta_grid.empty()) {
    std::vector<std::pair<double, double>> pts;
    std::ostringstream csv;
    csv << "eta,bound\n";
    for (double eta : config.eta_grid) {
      const double v = terms(eta).total;
      pts.emplace_back(eta, v);
      csv << format_double(eta) << ',' << format_double(v) << '\n';
    }
    out.artifacts["bound_sweep.csv"] = csv.str();
    json sweep = json::array();
    for (const auto& [e, v] : pts) sweep.push_back({e, v});
    out.report["sweep"] = sweep;
    if (pts.size() >= 3) {
      const RateFit fit = rate_fit(pts);
      out.report["sweep_fit"] = fit_json(fit);
      const bool ok = std::abs(fit.slope - 2.0) <= 1e-6;
      pass = pass && ok;
      line += std::string(line.empty() ? "" : "; ") + "sweep slope " + fmt(fit.slope, 10) +
              " within 2 +- 1e-6";
    }
  }
  if (!config.eta && config.eta_grid.empty()) throw ConfigError("bound-eval needs \"eta\" or an eta sweep");
  out.report["constants"] = cj;
  set_verdict(out, pass, line);
  return out;
}

}  // namespace langevin
