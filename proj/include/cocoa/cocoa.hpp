#pragma once

#include <cstdint>

#include "cocoa/data.hpp"
#include "cocoa/local_solver.hpp"
#include "cocoa/loss.hpp"
#include "cocoa/trace.hpp"

namespace cocoa {

struct CocoaConfig {
  /// Outer rounds.
  int T = 10;
  /// Merge scale: alpha_[k] += (beta_K / K) delta_alpha_[k]. 1 averages, K adds.
  double beta_K = 1.0;
  LocalSolverConfig local;
  double lambda = 1e-3;
  /// Worker k in round t draws from mix_seed(seed, t, k).
  std::uint64_t seed = 1;
  /// Rebuild w from alpha after this many epochs of coordinate updates (0 = never).
  double recompute_epochs = 1.0;

  void validate(int num_blocks) const;
};

/// Communication-efficient distributed dual coordinate ascent.
///
/// Starting from alpha = 0, w = 0, each round broadcasts w to the K workers,
/// runs the local dual method on every block against that snapshot, scales the
/// block updates by beta_K / K and reduces the delta_w vectors in ascending
/// worker order. Objectives are recorded at round 0 and after evaluated rounds.
///
/// With beta_K == 1 the dual is monotone; a decrease of more than 1e-6 means a
/// broken invariant and raises SolverError.
Trace run_cocoa(const Dataset& ds, const Partition& partition, const LossModel& model,
                const CocoaConfig& cfg, const RunOptions& opts = {});

}  // namespace cocoa
