#include "langevin/cli.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "langevin/errors.hpp"
#include "langevin/experiment.hpp"
#include "langevin/io.hpp"

namespace langevin {

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct BoundFlags {
  std::optional<int> theorem;
  std::optional<double> eta;
  std::optional<double> horizon;
  std::optional<int> dim;
  std::string constants;
  std::vector<double> eta_sweep;
};

struct EstimateFlags {
  std::string p, q;
  std::vector<std::string> estimators;
};

using Command = std::function<CommandOutcome(const ExperimentConfig&)>;

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config, "experiment config JSON");
  sub->add_option("--out", flags.out, "output directory for reports and artifacts");
  sub->add_option("--seed", flags.seed, "master seed (overrides the config)");
  sub->add_option("--threads", flags.threads, "worker threads (results do not depend on it)");
}

std::string file_stem(const std::string& command) {
  std::string s = command;
  for (auto& ch : s) {
    if (ch == '-') ch = '_';
  }
  return s;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Euler-Maruyama Langevin discretization experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kBinaryVersion);

  CommonFlags common;
  BoundFlags bound;
  EstimateFlags est;
  std::map<std::string, Command> commands{
      {"rate-scan", cmd_rate_scan}, {"mixing-scan", cmd_mixing_scan}, {"verify", cmd_verify},
      {"sample", cmd_sample},       {"estimate", cmd_estimate},       {"bound-eval", cmd_bound_eval}};
  std::map<std::string, CLI::App*> subs;
  subs["rate-scan"] = app.add_subcommand("rate-scan", "KL vs step size on an eta grid, with slope fits");
  subs["mixing-scan"] = app.add_subcommand("mixing-scan", "measured vs predicted mixing times");
  subs["verify"] = app.add_subcommand("verify", "check the regularity assumptions for a model and init");
  subs["sample"] = app.add_subcommand("sample", "simulate an Euler-Maruyama ensemble");
  subs["estimate"] = app.add_subcommand("estimate", "divergence and moment estimates from ensemble CSVs");
  subs["bound-eval"] = app.add_subcommand("bound-eval", "evaluate a closed-form KL bound");
  for (auto& [name, sub] : subs) add_common(sub, common);

  auto* b = subs["bound-eval"];
  b->add_option("--theorem", bound.theorem, "1 (dissipative) or 2 (gradient drift)");
  b->add_option("--eta", bound.eta, "step size");
  b->add_option("--horizon", bound.horizon, "time horizon T");
  b->add_option("--dim", bound.dim, "dimension d");
  b->add_option("--constants", bound.constants, "constants JSON file");
  b->add_option("--eta-sweep", bound.eta_sweep, "step sizes for a slope fit");
  auto* e = subs["estimate"];
  e->add_option("--p", est.p, "ensemble CSV for P");
  e->add_option("--q", est.q, "ensemble CSV for Q");
  e->add_option("--estimator", est.estimators, "knn_kl, w2_empirical_1d, tv_histogram, moment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitPass : kExitConfig;
  }

  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }

  try {
    ExperimentConfig config =
        common.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(common.config);
    if (common.seed) config.seed = *common.seed;
    if (common.threads) config.threads = *common.threads;
    if (!common.out.empty()) config.output = common.out;
    if (bound.theorem) config.theorem = *bound.theorem;
    if (bound.eta) config.eta = *bound.eta;
    if (bound.horizon) config.horizon = *bound.horizon;
    if (bound.dim) config.dim = *bound.dim;
    if (!bound.constants.empty()) config.constants_file = bound.constants;
    if (!bound.eta_sweep.empty()) config.eta_grid = bound.eta_sweep;
    if (!est.p.empty()) config.p_path = est.p;
    if (!est.q.empty()) config.q_path = est.q;
    if (!est.estimators.empty()) config.estimators = est.estimators;
    if (config.threads < 1) throw ConfigError("threads must be at least 1");

    CommandOutcome outcome = commands.at(command)(config);
    outcome.report["config"] = config.to_json();
    outcome.report["config"].erase("threads");
    outcome.report["config"].erase("output");
    const std::string report = outcome.report.dump(2) + "\n";
    if (!config.output.empty()) {
      const std::filesystem::path dir = config.output;
      for (const auto& [name, content] : outcome.artifacts) write_text(dir / name, content);
      write_text(dir / (file_stem(command) + ".json"), report);
    }
    out << report;
    for (const auto& w : outcome.warnings) err << "warning: " << w << '\n';
    if (outcome.report.contains("verdict")) err << outcome.report["verdict"]["line"].get<std::string>() << '\n';
    return outcome.pass ? kExitPass : kExitFail;
  } catch (const DivergenceError& ex) {
    nlohmann::json report = {{"command", command},
                             {"error", "divergence"},
                             {"message", ex.what()},
                             {"chain", ex.chain()},
                             {"step", ex.step()}};
    out << report.dump(2) << '\n';
    err << "error: " << ex.what() << '\n';
    return kExitFail;
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const InputError& ex) {
    err << "input error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const UnsupportedError& ex) {
    err << "unsupported: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& ex) {
    err << "config error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFail;
  }
}

}  // namespace langevin
