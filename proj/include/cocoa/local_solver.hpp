#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "cocoa/data.hpp"
#include "cocoa/loss.hpp"
#include "cocoa/types.hpp"

namespace cocoa {

/// Output of a local dual method on block k. delta_w == A_[k] delta_alpha.
struct LocalUpdate {
  Vector delta_alpha;  // length n_k, ordered like the block
  Vector delta_w;      // length d
  std::uint64_t coordinate_updates = 0;
};

enum class LocalMode { sdca, exact };

struct LocalSolverConfig {
  /// Inner iterations per call (sdca mode).
  Index H = 1;
  std::uint64_t seed = 0;
  LocalMode mode = LocalMode::sdca;
  /// Local duality gap target (exact mode).
  double tol = 1e-10;
  /// Epoch cap for exact mode.
  Index max_epochs = 10000;

  void validate() const;
};

/// Exact maximizer over delta of the single-coordinate dual subproblem
///
///   -(lambda n / 2) || w + delta x / (lambda n) ||^2 - l*(-(alpha + delta))
///
/// expressed through the scalars it depends on: lambda_n = lambda * n,
/// sq_norm = ||x||^2, margin = x^T w, the label and the current alpha.
/// Hinge and smoothed hinge use the clipped closed form; logistic solves the
/// stationarity condition in logit coordinates by safeguarded Newton.
double coordinate_step(const LossModel& model, double lambda_n, double sq_norm, double margin,
                       double label, double alpha);

/// coordinate_step for data point i against the primal vector w.
double coordinate_update(const Dataset& ds, Index i, double alpha_i, const Vector& w, double lambda,
                         const LossModel& model);

/// Called after every inner step with (step, block position, delta alpha).
using StepObserver = std::function<void(Index, Index, double)>;

/// H steps of stochastic dual coordinate ascent restricted to `block`, sampling
/// positions uniformly with replacement and refreshing a private copy of w
/// after every step. `w` must equal A alpha for the full current alpha.
LocalUpdate local_sdca(const Dataset& ds, std::span<const Index> block, const Vector& alpha_blk,
                       const Vector& w, const LossModel& model, double lambda,
                       const LocalSolverConfig& cfg, const StepObserver& observer = {});

/// Cyclic coordinate sweeps over `block` until the local duality gap is <= tol.
/// Throws SolverError carrying the last gap when max_epochs is exhausted.
LocalUpdate exact_block_solver(const Dataset& ds, std::span<const Index> block,
                               const Vector& alpha_blk, const Vector& w, const LossModel& model,
                               double lambda, double tol, Index max_epochs = 10000);

/// Dispatches on cfg.mode.
LocalUpdate solve_local(const Dataset& ds, std::span<const Index> block, const Vector& alpha_blk,
                        const Vector& w, const LossModel& model, double lambda,
                        const LocalSolverConfig& cfg);

}  // namespace cocoa
