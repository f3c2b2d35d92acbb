// Command-line harness: run, sweep, reference and theory subcommands.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cocoa/data.hpp"
#include "cocoa/experiment.hpp"
#include "cocoa/theory.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kIo = 3,
  kData = 4,
  kSolver = 5,
};

struct Flags {
  std::string config_path;
  std::optional<std::string> data;
  std::optional<std::string> synthetic;
  std::optional<std::uint64_t> data_seed;
  std::optional<long long> dim;
  std::optional<std::string> loss;
  std::optional<double> lambda;
  std::optional<std::string> method;
  std::optional<int> K;
  std::optional<long long> H;
  std::optional<double> beta;
  std::optional<int> T;
  std::optional<std::string> seeds;
  std::optional<std::string> out;
  std::optional<std::string> count_direction;
  std::optional<double> ref_tol;
  std::optional<std::string> partition;
  std::optional<std::string> local_solver;
  std::optional<std::string> execution;
  std::optional<int> eval_every;
  bool no_reference = false;
  bool no_scale = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON experiment config; flags override its fields");
  cmd->add_option("--data", f.data, "LIBSVM file");
  cmd->add_option("--synthetic", f.synthetic, "synthetic data n,d,sparsity,noise");
  cmd->add_option("--data-seed", f.data_seed, "seed of the synthetic generator");
  cmd->add_option("--dim", f.dim, "force the feature dimension");
  cmd->add_option("--loss", f.loss, "hinge | smoothed_hinge[:width] | logistic");
  cmd->add_option("--lambda", f.lambda, "regularization strength");
  cmd->add_option("--method", f.method, "cocoa | minibatch_cd | minibatch_sgd | local_sgd");
  cmd->add_option("--K", f.K, "number of workers");
  cmd->add_option("--H", f.H, "inner steps / batch size per worker and round");
  cmd->add_option("--beta", f.beta, "merge scaling");
  cmd->add_option("--T", f.T, "outer rounds");
  cmd->add_option("--seeds", f.seeds, "comma-separated run seeds");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--count-direction", f.count_direction, "up | down | both");
  cmd->add_option("--ref-tol", f.ref_tol, "duality gap of the reference solve");
  cmd->add_option("--partition", f.partition, "random | ordered");
  cmd->add_option("--local-solver", f.local_solver, "sdca | exact (cocoa only)");
  cmd->add_option("--execution", f.execution, "serial | parallel worker execution");
  cmd->add_option("--eval-every", f.eval_every, "objective evaluation cadence in rounds");
  cmd->add_flag("--no-reference", f.no_reference, "skip the reference solve");
  cmd->add_flag("--no-scale", f.no_scale, "do not rescale file data to unit max-norm");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

cocoa::ExperimentConfig resolve(const Flags& f) {
  cocoa::ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = cocoa::load_config(f.config_path);
  if (f.data) {
    cfg.data_path = *f.data;
    cfg.synthetic.reset();
  }
  if (f.synthetic) {
    const auto parts = split(*f.synthetic, ',');
    if (parts.size() != 4) throw cocoa::ConfigError("--synthetic expects n,d,sparsity,noise");
    cocoa::SyntheticSpec spec;
    try {
      spec.n = std::stoll(parts[0]);
      spec.d = std::stoll(parts[1]);
      spec.sparsity = std::stod(parts[2]);
      spec.label_noise = std::stod(parts[3]);
    } catch (const std::logic_error&) {
      throw cocoa::ConfigError("--synthetic expects numbers n,d,sparsity,noise");
    }
    if (cfg.synthetic) spec.seed = cfg.synthetic->seed;
    cfg.synthetic = spec;
    cfg.data_path.reset();
  }
  if (f.data_seed) {
    if (!cfg.synthetic) throw cocoa::ConfigError("--data-seed needs synthetic data");
    cfg.synthetic->seed = *f.data_seed;
  }
  if (f.dim) cfg.dim = *f.dim;
  if (f.loss) cfg.loss = *f.loss;
  if (f.lambda) cfg.lambda = *f.lambda;
  if (f.method) cfg.method = cocoa::parse_method(*f.method);
  if (f.K) cfg.K = *f.K;
  if (f.H) cfg.H = *f.H;
  if (f.beta) cfg.beta = *f.beta;
  if (f.T) cfg.T = *f.T;
  if (f.seeds) {
    cfg.seeds.clear();
    for (const auto& s : split(*f.seeds, ',')) {
      try {
        cfg.seeds.push_back(std::stoull(s));
      } catch (const std::logic_error&) {
        throw cocoa::ConfigError("bad seed '" + s + "'");
      }
    }
  }
  if (f.out) cfg.out = *f.out;
  if (f.count_direction) cfg.count_direction = *f.count_direction;
  if (f.ref_tol) cfg.ref_tol = *f.ref_tol;
  if (f.partition) cfg.partition = *f.partition;
  if (f.local_solver) cfg.local_solver = *f.local_solver;
  if (f.execution) cfg.execution = *f.execution;
  if (f.eval_every) cfg.eval_every = *f.eval_every;
  if (f.no_reference) cfg.reference = false;
  if (f.no_scale) cfg.scale = false;
  cfg.validate();
  return cfg;
}

int run_main(int argc, char** argv) {
  CLI::App app{"Communication-efficient distributed dual coordinate ascent experiments"};
  app.require_subcommand(1);

  Flags run_flags, sweep_flags, ref_flags, theory_flags;
  auto* run = app.add_subcommand("run", "run one method for every seed and write traces + reports");
  add_common(run, run_flags);

  auto* sw = app.add_subcommand("sweep", "vary H, beta or method and summarize rounds/vectors to target");
  add_common(sw, sweep_flags);
  std::string axis;
  std::string values;
  std::optional<std::uint64_t> budget;
  sw->add_option("--axis", axis, "H | beta | method")->required();
  sw->add_option("--values", values, "comma-separated values")->required();
  sw->add_option("--update-budget", budget, "fixed coordinate-update budget for H sweeps (T = budget/(K*H))");

  auto* ref = app.add_subcommand("reference", "solve to high accuracy and cache the solution");
  add_common(ref, ref_flags);

  auto* th = app.add_subcommand("theory", "print convergence constants for the configured partition");
  add_common(th, theory_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  if (run->parsed()) {
    const auto cfg = resolve(run_flags);
    const auto result = cocoa::run_experiment(cfg);
    for (const auto& r : result.runs) {
      const auto& last = r.trace.records.back();
      std::cout << "seed " << r.seed << ": rounds=" << last.round << " primal=" << last.primal
                << " gap=" << last.gap << " vectors=" << last.vectors << " -> " << r.csv_path.string() << "\n";
    }
    return kOk;
  }
  if (sw->parsed()) {
    const auto cfg = resolve(sweep_flags);
    const auto result = cocoa::sweep(cfg, cocoa::parse_sweep_axis(axis), split(values, ','), budget);
    std::cout << result.summary.dump(2) << "\n";
    return kOk;
  }
  if (ref->parsed()) {
    const auto cfg = resolve(ref_flags);
    const auto data = cocoa::prepare_data(cfg);
    const auto model = cocoa::LossModel::parse(cfg.loss);
    cocoa::ReferenceCache cache(cfg.cache_dir ? *cfg.cache_dir : cfg.out);
    const auto sol = cache.get(data.data, cfg.lambda, model, cfg.ref_tol, cfg.ref_max_epochs);
    nlohmann::json j{{"primal", sol.primal}, {"dual", sol.dual}, {"gap", sol.gap},
                     {"scale_factor", data.scale},
                     {"cache", cache.path_for(cocoa::ReferenceCache::key(data.data, cfg.lambda, model)).string()}};
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  if (th->parsed()) {
    const auto cfg = resolve(theory_flags);
    const auto data = cocoa::prepare_data(cfg);
    const auto model = cocoa::LossModel::parse(cfg.loss);
    const auto partition = cocoa::make_partition(cfg, data.data.size(), cfg.seeds.front());
    nlohmann::json j = cocoa::theory_report(data.data, partition, model, cfg.lambda, cfg.H, cfg.T);
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  return kInternal;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const cocoa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const cocoa::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const cocoa::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kData;
  } catch (const cocoa::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const cocoa::SolverError& e) {
    std::cerr << "solver error: " << e.what() << " (last gap " << e.last_gap() << ")\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}
