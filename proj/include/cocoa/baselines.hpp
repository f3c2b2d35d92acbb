#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cocoa/data.hpp"
#include "cocoa/loss.hpp"
#include "cocoa/trace.hpp"

namespace cocoa {

enum class BaselineMethod { minibatch_cd, minibatch_sgd, local_sgd };

std::string to_string(BaselineMethod m);

/// Which counter drives the Pegasos step size 1/(lambda * tau).
enum class StepSchedule {
  by_round,       // tau = outer round t
  by_inner_step,  // tau = (t - 1) * H + h
};

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::minibatch_cd;
  /// Points processed per worker per round.
  Index H = 1;
  /// Merge scale. Mini-batch methods divide by the batch size b = K*H and
  /// multiply by beta (1 averages, b adds); local SGD uses beta / K.
  double beta = 1.0;
  int T = 10;
  double lambda = 1e-3;
  std::uint64_t seed = 1;
  /// Defaults to by_round for mini-batch SGD and by_inner_step for local SGD.
  std::optional<StepSchedule> schedule;
  /// Rebuild w from alpha after this many epochs (mini-batch CD only; 0 = never).
  double recompute_epochs = 1.0;

  StepSchedule effective_schedule() const;
  void validate(int num_blocks) const;
};

/// Mini-batch SDCA: each worker takes H distinct coordinates of its block and
/// computes every exact coordinate step against the same stale (alpha, w).
/// The dual is never refreshed inside a round. Sets trace.diverged when the
/// dual stays below its best value so far for more than five consecutive
/// evaluated rounds.
Trace run_minibatch_cd(const Dataset& ds, const Partition& partition, const LossModel& model,
                       const BaselineConfig& cfg, const RunOptions& opts = {});

/// Mini-batch Pegasos: each worker computes H subgradient steps from the same
/// w, and the master averages them over the K*H batch (times beta).
Trace run_minibatch_sgd(const Dataset& ds, const Partition& partition, const LossModel& model,
                        const BaselineConfig& cfg, const RunOptions& opts = {});

/// Locally-updating Pegasos: each worker runs H sequential steps on a private
/// copy of w; the master adds beta/K times the sum of the K displacements.
Trace run_local_sgd(const Dataset& ds, const Partition& partition, const LossModel& model,
                    const BaselineConfig& cfg, const RunOptions& opts = {});

/// Dispatches on cfg.method.
Trace run_baseline(const Dataset& ds, const Partition& partition, const LossModel& model,
                   const BaselineConfig& cfg, const RunOptions& opts = {});

}  // namespace cocoa
