#pragma once

// Shared plumbing for the bulk-synchronous methods: block-structured alpha,
// periodic rebuild of w, and trace recording.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "cocoa/data.hpp"
#include "cocoa/objectives.hpp"
#include "cocoa/trace.hpp"

namespace cocoa::detail {

inline Vector assemble_alpha(const std::vector<Vector>& blocks, const Partition& partition, Index n) {
  Vector alpha = Vector::Zero(n);
  for (int k = 0; k < partition.num_blocks(); ++k) {
    const auto& idx = partition.blocks[static_cast<std::size_t>(k)];
    for (std::size_t r = 0; r < idx.size(); ++r) alpha(idx[r]) = blocks[static_cast<std::size_t>(k)](static_cast<Index>(r));
  }
  return alpha;
}

/// First H positions of a partial Fisher-Yates shuffle of {0..nk-1}. The first
/// draw matches a single uniform pick from the same generator.
inline std::vector<Index> sample_without_replacement(Index nk, Index H, std::mt19937_64& rng) {
  std::vector<Index> pos(static_cast<std::size_t>(nk));
  std::iota(pos.begin(), pos.end(), Index{0});
  for (Index j = 0; j < H; ++j) {
    std::uniform_int_distribution<Index> pick(j, nk - 1);
    std::swap(pos[static_cast<std::size_t>(j)], pos[static_cast<std::size_t>(pick(rng))]);
  }
  pos.resize(static_cast<std::size_t>(H));
  return pos;
}

inline void validate_problem(const Dataset& ds, const Partition& partition, const LossModel& model,
                             double lambda) {
  ds.require_nonempty();
  partition.validate(ds.size());
  ds.require_binary_labels();
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (model.family == LossFamily::smoothed_hinge && !(model.smoothing > 0.0))
    throw ConfigError("smoothing width must be positive");
}

class Recorder {
 public:
  Recorder(const Dataset& ds, double lambda, const LossModel& model, const RunOptions& opts,
           Trace& trace)
      : ds_(ds), lambda_(lambda), model_(model), opts_(opts), trace_(trace) {}

  /// Appends a record. `alpha` may be null for primal-only methods.
  const TraceRecord& record(int round, const Vector& w, const Vector* alpha, const CommLedger& ledger) {
    TraceRecord r;
    r.round = round;
    r.coordinate_updates = ledger.coordinate_updates;
    r.epochs = static_cast<double>(ledger.coordinate_updates) / static_cast<double>(ds_.size());
    r.primal = primal_value(w, ds_, lambda_, model_);
    if (alpha) {
      r.dual = dual_value(*alpha, ds_, lambda_, model_);
      r.gap = r.primal - r.dual;
    } else {
      r.dual = std::numeric_limits<double>::quiet_NaN();
      r.gap = std::numeric_limits<double>::quiet_NaN();
    }
    r.vectors = ledger.communicated(opts_.count);
    r.synthetic_time = opts_.cost.time(r.vectors, r.epochs);
    trace_.records.push_back(r);
    return trace_.records.back();
  }

  bool due(int round, int last_round) const {
    return round % opts_.eval_every == 0 || round == last_round;
  }

  bool reached_target() const {
    return opts_.p_star && !trace_.records.empty() &&
           trace_.records.back().primal - *opts_.p_star <= opts_.stop_suboptimality;
  }

 private:
  const Dataset& ds_;
  double lambda_;
  const LossModel& model_;
  const RunOptions& opts_;
  Trace& trace_;
};

/// Decides when to rebuild w from alpha to bound incremental drift.
class RecomputeSchedule {
 public:
  RecomputeSchedule(double epochs, Index n)
      : every_(epochs > 0.0 ? static_cast<std::uint64_t>(std::max(1.0, std::ceil(epochs * static_cast<double>(n)))) : 0) {}

  bool due(std::uint64_t total_updates) {
    if (every_ == 0) return false;
    const std::uint64_t bucket = total_updates / every_;
    if (bucket == bucket_) return false;
    bucket_ = bucket;
    return true;
  }

 private:
  std::uint64_t every_;
  std::uint64_t bucket_ = 0;
};

}  // namespace cocoa::detail
