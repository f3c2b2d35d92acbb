#include "cocoa/cocoa.hpp"

#include <sstream>

#include "cocoa/objectives.hpp"
#include "cocoa/runtime.hpp"
#include "recorder.hpp"

namespace cocoa {

void CocoaConfig::validate(int num_blocks) const {
  if (T < 1) throw ConfigError("T must be at least 1");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(beta_K >= 1.0 && beta_K <= static_cast<double>(num_blocks)))
    throw ConfigError("beta_K must lie in [1, K]");
  if (recompute_epochs < 0.0) throw ConfigError("recompute_epochs must be non-negative");
  local.validate();
}

Trace run_cocoa(const Dataset& ds, const Partition& partition, const LossModel& model,
                const CocoaConfig& cfg, const RunOptions& opts) {
  detail::validate_problem(ds, partition, model, cfg.lambda);
  const int K = partition.num_blocks();
  cfg.validate(K);
  opts.validate();

  const Index n = ds.size();
  const double lambda = cfg.lambda;
  const double scale = cfg.beta_K / static_cast<double>(K);

  Trace trace;
  trace.method = "cocoa";
  detail::Recorder recorder(ds, lambda, model, opts, trace);
  detail::RecomputeSchedule recompute(cfg.recompute_epochs, n);
  BulkSyncRuntime runtime(K, ds.dim(), opts.execution);

  // Worker-owned dual blocks; the master only ever touches w.
  std::vector<Vector> alpha_blocks;
  for (int k = 0; k < K; ++k) alpha_blocks.push_back(Vector::Zero(partition.block_size(k)));
  Vector w = Vector::Zero(ds.dim());

  Vector alpha = detail::assemble_alpha(alpha_blocks, partition, n);
  double last_dual = recorder.record(0, w, &alpha, runtime.ledger()).dual;

  for (int t = 1; t <= cfg.T; ++t) {
    auto task = [&](int k, const Message& down) {
      LocalSolverConfig local = cfg.local;
      local.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k));
      LocalUpdate upd = solve_local(ds, partition.blocks[static_cast<std::size_t>(k)],
                                    alpha_blocks[static_cast<std::size_t>(k)], down.payload, model,
                                    lambda, local);
      return WorkerReply<Vector>{reduce_message(t, k, std::move(upd.delta_w)),
                                 std::move(upd.delta_alpha), upd.coordinate_updates};
    };
    auto merge = [&](std::span<const WorkerReply<Vector>> replies) {
      Vector sum = Vector::Zero(ds.dim());
      for (int k = 0; k < K; ++k) {
        alpha_blocks[static_cast<std::size_t>(k)] += scale * replies[static_cast<std::size_t>(k)].local;
        sum += replies[static_cast<std::size_t>(k)].message.payload;
      }
      w += scale * sum;
    };
    runtime.execute_round<Vector>(t, w, task, merge);

    const bool rebuild = recompute.due(runtime.ledger().coordinate_updates);
    if (rebuild || recorder.due(t, cfg.T)) alpha = detail::assemble_alpha(alpha_blocks, partition, n);
    if (rebuild) w = primal_from_dual(alpha, ds, lambda);

    if (recorder.due(t, cfg.T)) {
      const TraceRecord& rec = recorder.record(t, w, &alpha, runtime.ledger());
      if (cfg.beta_K == 1.0 && rec.dual < last_dual - 1e-6) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "dual objective decreased in round " << t << " from " << last_dual << " to " << rec.dual
            << " with beta_K = 1";
        throw SolverError(msg.str(), rec.gap);
      }
      last_dual = rec.dual;
      if (recorder.reached_target()) break;
    }
  }

  trace.ledger = runtime.ledger();
  trace.alpha = detail::assemble_alpha(alpha_blocks, partition, n);
  trace.w = std::move(w);
  return trace;
}

}  // namespace cocoa
