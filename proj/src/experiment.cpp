#include "cocoa/experiment.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "cocoa/local_solver.hpp"
#include "cocoa/objectives.hpp"

namespace cocoa {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::cocoa: return "cocoa";
    case Method::minibatch_cd: return "minibatch_cd";
    case Method::minibatch_sgd: return "minibatch_sgd";
    case Method::local_sgd: return "local_sgd";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  if (text == "cocoa") return Method::cocoa;
  if (text == "minibatch_cd") return Method::minibatch_cd;
  if (text == "minibatch_sgd") return Method::minibatch_sgd;
  if (text == "local_sgd") return Method::local_sgd;
  throw ConfigError("unknown method '" + text + "' (expected cocoa, minibatch_cd, minibatch_sgd, local_sgd)");
}

void ExperimentConfig::validate() const {
  if (data_path && synthetic) throw ConfigError("give either a data path or a synthetic spec, not both");
  if (!data_path && !synthetic) throw ConfigError("no data source: set a data path or a synthetic spec");
  if (synthetic) {
    if (synthetic->n < 1 || synthetic->d < 1) throw ConfigError("synthetic n and d must be >= 1");
    if (!(synthetic->sparsity > 0.0 && synthetic->sparsity <= 1.0))
      throw ConfigError("synthetic sparsity must lie in (0, 1]");
    if (!(synthetic->label_noise >= 0.0 && synthetic->label_noise <= 1.0))
      throw ConfigError("synthetic label noise must lie in [0, 1]");
  }
  if (dim && *dim < 1) throw ConfigError("dim must be >= 1");
  if (partition != "random" && partition != "ordered") throw ConfigError("partition must be random or ordered");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  LossModel::parse(loss);
  if (K < 1) throw ConfigError("K must be at least 1");
  if (H < 1) throw ConfigError("H must be at least 1");
  if (T < 1) throw ConfigError("T must be at least 1");
  if (local_solver != "sdca" && local_solver != "exact") throw ConfigError("local_solver must be sdca or exact");
  if (!(local_tol > 0.0)) throw ConfigError("local_tol must be positive");
  if (step_schedule && *step_schedule != "by_round" && *step_schedule != "by_inner_step")
    throw ConfigError("step_schedule must be by_round or by_inner_step");
  if (recompute_epochs < 0.0) throw ConfigError("recompute_epochs must be non-negative");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (out.empty()) throw ConfigError("output path must not be empty");
  parse_count_direction(count_direction);
  if (execution != "serial" && execution != "parallel") throw ConfigError("execution must be serial or parallel");
  if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (cost_per_vector < 0.0 || cost_per_epoch < 0.0) throw ConfigError("cost coefficients must be non-negative");
  if (!(ref_tol > 0.0)) throw ConfigError("ref_tol must be positive");
  if (ref_max_epochs < 1) throw ConfigError("ref_max_epochs must be at least 1");

  const double upper = method == Method::cocoa || method == Method::local_sgd
                           ? static_cast<double>(K)
                           : static_cast<double>(K) * static_cast<double>(H);
  if (!(beta >= 1.0 && beta <= upper))
    throw ConfigError("beta=" + std::to_string(beta) + " outside [1, " + std::to_string(upper) + "] for " +
                      to_string(method));
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json::object();
  j["data"] = c.data_path ? json(*c.data_path) : json(nullptr);
  if (c.synthetic)
    j["synthetic"] = {{"n", c.synthetic->n},
                      {"d", c.synthetic->d},
                      {"sparsity", c.synthetic->sparsity},
                      {"noise", c.synthetic->label_noise},
                      {"seed", c.synthetic->seed}};
  else
    j["synthetic"] = nullptr;
  j["dim"] = c.dim ? json(*c.dim) : json(nullptr);
  j["scale"] = c.scale;
  j["partition"] = c.partition;
  j["lambda"] = c.lambda;
  j["loss"] = c.loss;
  j["method"] = to_string(c.method);
  j["K"] = c.K;
  j["H"] = c.H;
  j["beta"] = c.beta;
  j["T"] = c.T;
  j["local_solver"] = c.local_solver;
  j["local_tol"] = c.local_tol;
  j["step_schedule"] = c.step_schedule ? json(*c.step_schedule) : json(nullptr);
  j["recompute_epochs"] = c.recompute_epochs;
  j["seeds"] = c.seeds;
  j["out"] = c.out;
  j["count_direction"] = c.count_direction;
  j["execution"] = c.execution;
  j["eval_every"] = c.eval_every;
  j["cost_per_vector"] = c.cost_per_vector;
  j["cost_per_epoch"] = c.cost_per_epoch;
  j["reference"] = c.reference;
  j["ref_tol"] = c.ref_tol;
  j["ref_max_epochs"] = c.ref_max_epochs;
  j["cache_dir"] = c.cache_dir ? json(*c.cache_dir) : json(nullptr);
}

void from_json(const json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "data",     "synthetic",       "dim",         "scale",          "partition",  "lambda",
      "loss",     "method",          "K",           "H",              "beta",       "T",
      "local_solver", "local_tol",   "step_schedule", "recompute_epochs", "seeds",  "out",
      "count_direction", "execution", "eval_every", "cost_per_vector", "cost_per_epoch",
      "reference", "ref_tol",        "ref_max_epochs", "cache_dir"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

  try {
    auto opt_string = [&](const char* key, std::optional<std::string>& dst) {
      if (j.contains(key)) dst = j[key].is_null() ? std::nullopt : std::optional(j[key].get<std::string>());
    };
    opt_string("data", c.data_path);
    if (j.contains("synthetic")) {
      if (j["synthetic"].is_null()) {
        c.synthetic.reset();
      } else {
        const auto& s = j["synthetic"];
        SyntheticSpec spec;
        spec.n = s.value("n", spec.n);
        spec.d = s.value("d", spec.d);
        spec.sparsity = s.value("sparsity", spec.sparsity);
        spec.label_noise = s.value("noise", spec.label_noise);
        spec.seed = s.value("seed", spec.seed);
        c.synthetic = spec;
      }
    }
    if (j.contains("dim")) c.dim = j["dim"].is_null() ? std::nullopt : std::optional<Index>(j["dim"].get<Index>());
    c.scale = j.value("scale", c.scale);
    c.partition = j.value("partition", c.partition);
    c.lambda = j.value("lambda", c.lambda);
    c.loss = j.value("loss", c.loss);
    if (j.contains("method")) c.method = parse_method(j["method"].get<std::string>());
    c.K = j.value("K", c.K);
    c.H = j.value("H", c.H);
    c.beta = j.value("beta", c.beta);
    c.T = j.value("T", c.T);
    c.local_solver = j.value("local_solver", c.local_solver);
    c.local_tol = j.value("local_tol", c.local_tol);
    opt_string("step_schedule", c.step_schedule);
    c.recompute_epochs = j.value("recompute_epochs", c.recompute_epochs);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.out = j.value("out", c.out);
    c.count_direction = j.value("count_direction", c.count_direction);
    c.execution = j.value("execution", c.execution);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.cost_per_vector = j.value("cost_per_vector", c.cost_per_vector);
    c.cost_per_epoch = j.value("cost_per_epoch", c.cost_per_epoch);
    c.reference = j.value("reference", c.reference);
    c.ref_tol = j.value("ref_tol", c.ref_tol);
    c.ref_max_epochs = j.value("ref_max_epochs", c.ref_max_epochs);
    opt_string("cache_dir", c.cache_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "': " + std::strerror(errno));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  ExperimentConfig cfg;
  from_json(j, cfg);
  return cfg;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData out;
  if (cfg.data_path) {
    out.data = load_libsvm(*cfg.data_path, cfg.dim);
  } else if (cfg.synthetic) {
    // the generator already scales to unit max-norm
    out.data = gen_synthetic(*cfg.synthetic);
    if (cfg.dim && *cfg.dim != out.data.dim())
      throw ConfigError("dim does not match the synthetic dimension");
    return out;
  } else {
    throw ConfigError("no data source");
  }
  out.data.require_nonempty();
  if (cfg.scale) {
    auto scaled = scale_to_unit_norm(out.data);
    out.data = std::move(scaled.data);
    out.scale = scaled.scale;
  }
  return out;
}

Partition make_partition(const ExperimentConfig& cfg, Index n, std::uint64_t seed) {
  if (cfg.partition == "ordered") return partition_ordered(n, cfg.K);
  return partition_uniform(n, cfg.K, mix_seed(seed, 0x70617274ULL));
}

ReferenceSolution reference_solve(const Dataset& ds, double lambda, const LossModel& model, double tol,
                                  Index max_epochs) {
  ds.require_nonempty();
  if (!(tol > 0.0)) throw ConfigError("reference tolerance must be positive");
  std::vector<Index> all(static_cast<std::size_t>(ds.size()));
  for (Index i = 0; i < ds.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  // Solve a little below tol so the freshly recomputed gap also satisfies it.
  const LocalUpdate upd = exact_block_solver(ds, all, Vector::Zero(ds.size()), Vector::Zero(ds.dim()),
                                             model, lambda, 0.5 * tol, max_epochs);
  ReferenceSolution sol;
  sol.alpha = upd.delta_alpha;
  sol.w = primal_from_dual(sol.alpha, ds, lambda);
  sol.primal = primal_value(sol.w, ds, lambda, model);
  sol.dual = dual_value(sol.alpha, ds, lambda, model);
  sol.gap = sol.primal - sol.dual;
  if (sol.gap > tol) throw SolverError("reference solve: final gap above tolerance", sol.gap);
  return sol;
}

std::string ReferenceCache::key(const Dataset& ds, double lambda, const LossModel& model) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << ds.fingerprint();
  std::uint64_t h = std::hash<std::string>{}(model.name());
  std::uint64_t lam = 0;
  std::memcpy(&lam, &lambda, sizeof lam);
  s << '_' << std::setw(16) << mix_seed(h, lam);
  return s.str();
}

fs::path ReferenceCache::path_for(const std::string& key) const { return dir_ / ("reference_" + key + ".json"); }

std::optional<ReferenceSolution> ReferenceCache::load(const Dataset& ds, double lambda, const LossModel& model,
                                                      double tol) const {
  const fs::path p = path_for(key(ds, lambda, model));
  std::ifstream in(p);
  if (!in) return std::nullopt;
  try {
    json j;
    in >> j;
    if (j.at("fingerprint").get<std::uint64_t>() != ds.fingerprint() || j.at("lambda").get<double>() != lambda ||
        j.at("loss").get<std::string>() != model.name())
      return std::nullopt;
    ReferenceSolution sol;
    sol.gap = j.at("gap").get<double>();
    if (sol.gap > tol) return std::nullopt;
    const auto a = j.at("alpha").get<std::vector<double>>();
    if (static_cast<Index>(a.size()) != ds.size()) return std::nullopt;
    sol.alpha = Eigen::Map<const Vector>(a.data(), static_cast<Index>(a.size()));
    sol.w = primal_from_dual(sol.alpha, ds, lambda);
    sol.primal = primal_value(sol.w, ds, lambda, model);
    sol.dual = dual_value(sol.alpha, ds, lambda, model);
    return sol;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void ReferenceCache::store(const Dataset& ds, double lambda, const LossModel& model,
                           const ReferenceSolution& sol) const {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory '" + dir_.string() + "': " + ec.message());
  json j{{"fingerprint", ds.fingerprint()}, {"lambda", lambda},  {"loss", model.name()},
         {"gap", sol.gap},                 {"primal", sol.primal}, {"dual", sol.dual},
         {"alpha", std::vector<double>(sol.alpha.data(), sol.alpha.data() + sol.alpha.size())}};
  const fs::path target = path_for(key(ds, lambda, model));
  // write-then-rename so concurrent readers never see a partial file
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << j.dump();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

ReferenceSolution ReferenceCache::get(const Dataset& ds, double lambda, const LossModel& model, double tol,
                                      Index max_epochs) const {
  if (auto hit = load(ds, lambda, model, tol)) return *hit;
  ReferenceSolution sol = reference_solve(ds, lambda, model, tol, max_epochs);
  store(ds, lambda, model, sol);
  return sol;
}

namespace {

RunOptions run_options(const ExperimentConfig& cfg) {
  RunOptions opts;
  opts.count = parse_count_direction(cfg.count_direction);
  opts.cost = CostModel{cfg.cost_per_vector, cfg.cost_per_epoch};
  opts.execution = cfg.execution == "parallel" ? Execution::parallel : Execution::serial;
  opts.eval_every = cfg.eval_every;
  return opts;
}

fs::path output_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "': " + std::strerror(errno));
  out << text;
  if (!out) throw IoError("write failed for '" + p.string() + "'");
}

std::string trace_csv(const Trace& trace) {
  std::ostringstream s;
  write_trace_csv(s, trace);
  return s.str();
}

std::string value_label(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

Trace run_method(const ExperimentConfig& cfg, const Dataset& ds, std::uint64_t seed, const RunOptions& opts) {
  cfg.validate();
  const LossModel model = LossModel::parse(cfg.loss);
  const Partition partition = make_partition(cfg, ds.size(), seed);
  if (cfg.method == Method::cocoa) {
    CocoaConfig cc;
    cc.T = cfg.T;
    cc.beta_K = cfg.beta;
    cc.lambda = cfg.lambda;
    cc.seed = seed;
    cc.recompute_epochs = cfg.recompute_epochs;
    cc.local.H = cfg.H;
    cc.local.mode = cfg.local_solver == "exact" ? LocalMode::exact : LocalMode::sdca;
    cc.local.tol = cfg.local_tol;
    return run_cocoa(ds, partition, model, cc, opts);
  }
  BaselineConfig bc;
  bc.method = cfg.method == Method::minibatch_cd    ? BaselineMethod::minibatch_cd
              : cfg.method == Method::minibatch_sgd ? BaselineMethod::minibatch_sgd
                                                    : BaselineMethod::local_sgd;
  bc.H = cfg.H;
  bc.beta = cfg.beta;
  bc.T = cfg.T;
  bc.lambda = cfg.lambda;
  bc.seed = seed;
  bc.recompute_epochs = cfg.recompute_epochs;
  if (cfg.step_schedule)
    bc.schedule = *cfg.step_schedule == "by_round" ? StepSchedule::by_round : StepSchedule::by_inner_step;
  return run_baseline(ds, partition, model, bc, opts);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const LossModel model = LossModel::parse(cfg.loss);
  const PreparedData prepared = prepare_data(cfg);
  const Dataset& ds = prepared.data;
  if (cfg.K > ds.size()) throw ConfigError("K exceeds the number of points");
  const fs::path dir = output_dir(cfg);

  ExperimentResult result;
  if (cfg.reference) {
    ReferenceCache cache(cfg.cache_dir ? fs::path(*cfg.cache_dir) : dir);
    result.reference = cache.get(ds, cfg.lambda, model, cfg.ref_tol, cfg.ref_max_epochs);
  }

  const RunOptions opts = run_options(cfg);
  for (std::uint64_t seed : cfg.seeds) {
    SeedResult run;
    run.seed = seed;
    run.trace = run_method(cfg, ds, seed, opts);

    json report;
    report["config"] = cfg;
    report["seed"] = seed;
    report["method"] = to_string(cfg.method);
    report["data"] = {{"n", ds.size()}, {"d", ds.dim()}, {"nnz", ds.nnz()}, {"scale_factor", prepared.scale}};
    const TraceRecord& last = run.trace.records.back();
    report["final"] = {{"round", last.round}, {"primal", last.primal}, {"dual", last.dual}, {"gap", last.gap},
                       {"vectors", last.vectors}, {"epochs", last.epochs}};
    report["diverged"] = run.trace.diverged;
    report["ledger"] = ledger_report(run.trace.ledger);
    report["count_direction"] = cfg.count_direction;
    report["synthetic_time_note"] = "synthetic_time = cost_per_vector * vectors + cost_per_epoch * epochs (arbitrary units)";
    if (result.reference) {
      report["reference"] = {{"primal", result.reference->primal},
                             {"dual", result.reference->dual},
                             {"gap", result.reference->gap}};
      report["final"]["primal_suboptimality"] = last.primal - result.reference->primal;
    } else {
      report["reference"] = nullptr;
    }
    if (model.is_smooth() && ds.size() <= kSigmaMinCap) {
      const Partition partition = make_partition(cfg, ds.size(), seed);
      report["theory"] = theory_report(ds, partition, model, cfg.lambda, cfg.H, cfg.T);
    } else {
      report["theory"] = nullptr;
    }

    const std::string stem = to_string(cfg.method) + "_seed" + std::to_string(seed);
    run.csv_path = dir / ("trace_" + stem + ".csv");
    run.json_path = dir / ("report_" + stem + ".json");
    write_text(run.csv_path, trace_csv(run.trace));
    write_text(run.json_path, report.dump(2) + "\n");
    run.report = std::move(report);
    result.runs.push_back(std::move(run));
  }
  return result;
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "H") return SweepAxis::H;
  if (text == "beta") return SweepAxis::beta;
  if (text == "method") return SweepAxis::method;
  throw ConfigError("sweep axis must be H, beta or method");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::H: return "H";
    case SweepAxis::beta: return "beta";
    case SweepAxis::method: return "method";
  }
  return "unknown";
}

SweepResult sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<std::string>& values,
                  std::optional<std::uint64_t> update_budget) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  cfg.validate();

  // Resolve and validate every variant before any compute.
  std::vector<ExperimentConfig> variants;
  for (const auto& v : values) {
    ExperimentConfig c = cfg;
    try {
      switch (axis) {
        case SweepAxis::H: {
          std::size_t used = 0;
          const long long h = std::stoll(v, &used);
          if (used != v.size()) throw ConfigError("bad H value '" + v + "'");
          c.H = static_cast<Index>(h);
          if (update_budget) {
            const std::uint64_t per_round = static_cast<std::uint64_t>(c.K) * static_cast<std::uint64_t>(std::max<Index>(c.H, 1));
            if (*update_budget % per_round != 0)
              throw ConfigError("update budget " + std::to_string(*update_budget) + " is not a multiple of K*H=" +
                                std::to_string(per_round));
            c.T = static_cast<int>(*update_budget / per_round);
          }
          break;
        }
        case SweepAxis::beta: {
          std::size_t used = 0;
          c.beta = std::stod(v, &used);
          if (used != v.size()) throw ConfigError("bad beta value '" + v + "'");
          break;
        }
        case SweepAxis::method:
          c.method = parse_method(v);
          break;
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad sweep value '" + v + "'");
    }
    c.validate();
    variants.push_back(std::move(c));
  }

  const LossModel model = LossModel::parse(cfg.loss);
  const PreparedData prepared = prepare_data(cfg);
  const Dataset& ds = prepared.data;
  const fs::path dir = output_dir(cfg);
  std::optional<ReferenceSolution> ref;
  if (cfg.reference) {
    ReferenceCache cache(cfg.cache_dir ? fs::path(*cfg.cache_dir) : dir);
    ref = cache.get(ds, cfg.lambda, model, cfg.ref_tol, cfg.ref_max_epochs);
  }

  SweepResult result;
  result.axis = axis;
  const std::uint64_t seed = cfg.seeds.front();
  json rows = json::array();
  for (std::size_t v = 0; v < variants.size(); ++v) {
    const ExperimentConfig& c = variants[v];
    Trace trace = run_method(c, ds, seed, run_options(c));
    SweepRow row;
    row.value = values[v];
    row.total_vectors = trace.records.back().vectors;
    row.rounds_run = trace.records.back().round;
    row.diverged = trace.diverged;
    json jrow{{"value", row.value}, {"rounds_run", row.rounds_run}, {"total_vectors", row.total_vectors},
              {"diverged", row.diverged}, {"T", c.T}, {"H", c.H}, {"beta", c.beta}, {"method", to_string(c.method)}};
    json rounds_to = json::object(), vectors_to = json::object();
    for (double target : kSweepTargets) {
      const auto hit = ref ? first_hit(trace, ref->primal, target) : std::nullopt;
      row.hits[target] = hit;
      rounds_to[value_label(target)] = hit ? json(hit->round) : json(nullptr);
      vectors_to[value_label(target)] = hit ? json(hit->vectors) : json(nullptr);
    }
    jrow["rounds_to"] = rounds_to;
    jrow["vectors_to"] = vectors_to;
    rows.push_back(jrow);

    write_text(dir / ("sweep_" + to_string(axis) + "_" + row.value + "_seed" + std::to_string(seed) + ".csv"),
               trace_csv(trace));
    result.rows.push_back(std::move(row));
    result.traces.push_back(std::move(trace));
  }

  result.summary = json{{"axis", to_string(axis)},
                        {"seed", seed},
                        {"targets", kSweepTargets},
                        {"target_metric", "primal suboptimality P(w) - P*"},
                        {"selection_note", "values are compared by rounds and vectors to target, not by wall time"},
                        {"update_budget", update_budget ? json(*update_budget) : json(nullptr)},
                        {"p_star", ref ? json(ref->primal) : json(nullptr)},
                        {"config", cfg},
                        {"rows", rows}};
  write_text(dir / ("sweep_" + to_string(axis) + ".json"), result.summary.dump(2) + "\n");
  return result;
}

}  // namespace cocoa
