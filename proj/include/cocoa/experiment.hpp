#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocoa/baselines.hpp"
#include "cocoa/cocoa.hpp"
#include "cocoa/data.hpp"
#include "cocoa/loss.hpp"
#include "cocoa/theory.hpp"
#include "cocoa/trace.hpp"

namespace cocoa {

enum class Method { cocoa, minibatch_cd, minibatch_sgd, local_sgd };

std::string to_string(Method m);
Method parse_method(const std::string& text);

/// Everything needed to reproduce one experiment. JSON round-trips with every
/// default materialized, so reports are self-describing.
struct ExperimentConfig {
  // data
  std::optional<std::string> data_path;
  std::optional<SyntheticSpec> synthetic;
  std::optional<Index> dim;
  bool scale = true;
  /// "random" (shuffled balanced chunks) or "ordered" (storage order).
  std::string partition = "random";

  double lambda = 1e-4;
  std::string loss = "hinge";
  Method method = Method::cocoa;
  int K = 4;
  Index H = 100;
  double beta = 1.0;
  int T = 100;
  /// LocalSDCA ("sdca") or the exact block solver ("exact") inside CoCoA.
  std::string local_solver = "sdca";
  double local_tol = 1e-10;
  std::optional<std::string> step_schedule;  // "by_round" | "by_inner_step"
  double recompute_epochs = 1.0;

  std::vector<std::uint64_t> seeds{1};
  std::string out = "out";
  std::string count_direction = "both";
  std::string execution = "serial";
  int eval_every = 1;
  double cost_per_vector = 1.0;
  double cost_per_epoch = 1.0;

  bool reference = true;
  double ref_tol = 1e-10;
  Index ref_max_epochs = 100000;
  /// Directory for cached reference solutions; defaults to `out`.
  std::optional<std::string> cache_dir;

  /// Throws ConfigError on the first invalid field.
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

/// Loaded (and optionally scaled) data for a config.
struct PreparedData {
  Dataset data;
  double scale = 1.0;
};
PreparedData prepare_data(const ExperimentConfig& cfg);

Partition make_partition(const ExperimentConfig& cfg, Index n, std::uint64_t seed);

struct ReferenceSolution {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  Vector alpha;
  Vector w;
};

/// Single-block exact solve to duality gap <= tol.
ReferenceSolution reference_solve(const Dataset& ds, double lambda, const LossModel& model, double tol,
                                  Index max_epochs = 100000);

/// On-disk cache of reference solutions keyed by (data fingerprint, lambda, loss).
class ReferenceCache {
 public:
  explicit ReferenceCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  static std::string key(const Dataset& ds, double lambda, const LossModel& model);
  std::filesystem::path path_for(const std::string& key) const;

  /// Cached solution for this key when its gap is <= tol.
  std::optional<ReferenceSolution> load(const Dataset& ds, double lambda, const LossModel& model,
                                        double tol) const;
  void store(const Dataset& ds, double lambda, const LossModel& model, const ReferenceSolution& sol) const;

  /// load() or solve-and-store.
  ReferenceSolution get(const Dataset& ds, double lambda, const LossModel& model, double tol,
                        Index max_epochs = 100000) const;

 private:
  std::filesystem::path dir_;
};

/// Runs the configured method once for one seed (no files written).
Trace run_method(const ExperimentConfig& cfg, const Dataset& ds, std::uint64_t seed,
                 const RunOptions& opts);

struct SeedResult {
  std::uint64_t seed = 0;
  Trace trace;
  nlohmann::json report;
  std::filesystem::path csv_path;
  std::filesystem::path json_path;
};

struct ExperimentResult {
  std::vector<SeedResult> runs;
  std::optional<ReferenceSolution> reference;
};

/// For each seed: run, write `<out>/trace_<method>_seed<seed>.csv` and
/// `<out>/report_<method>_seed<seed>.json`.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

enum class SweepAxis { H, beta, method };
SweepAxis parse_sweep_axis(const std::string& text);
std::string to_string(SweepAxis axis);

/// Primal suboptimality levels reported in sweep summaries.
inline const std::vector<double> kSweepTargets{1e-2, 1e-3};

struct SweepRow {
  std::string value;
  std::map<double, std::optional<TargetHit>> hits;
  std::uint64_t total_vectors = 0;
  int rounds_run = 0;
  bool diverged = false;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::H;
  std::vector<SweepRow> rows;
  std::vector<Trace> traces;
  nlohmann::json summary;
};

/// One run per value on the first seed. With `update_budget`, an H sweep sets
/// T = budget / (K H), which must divide exactly. Writes one CSV per value and
/// `<out>/sweep_<axis>.json`.
SweepResult sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<std::string>& values,
                  std::optional<std::uint64_t> update_budget = std::nullopt);

}  // namespace cocoa
