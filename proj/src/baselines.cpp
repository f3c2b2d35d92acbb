#include "cocoa/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "cocoa/local_solver.hpp"
#include "cocoa/objectives.hpp"
#include "cocoa/runtime.hpp"
#include "recorder.hpp"

namespace cocoa {

std::string to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::minibatch_cd: return "minibatch_cd";
    case BaselineMethod::minibatch_sgd: return "minibatch_sgd";
    case BaselineMethod::local_sgd: return "local_sgd";
  }
  return "unknown";
}

StepSchedule BaselineConfig::effective_schedule() const {
  if (schedule) return *schedule;
  return method == BaselineMethod::local_sgd ? StepSchedule::by_inner_step : StepSchedule::by_round;
}

void BaselineConfig::validate(int num_blocks) const {
  if (T < 1) throw ConfigError("T must be at least 1");
  if (H < 1) throw ConfigError("H must be at least 1");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (recompute_epochs < 0.0) throw ConfigError("recompute_epochs must be non-negative");
  const double upper = method == BaselineMethod::local_sgd
                           ? static_cast<double>(num_blocks)
                           : static_cast<double>(num_blocks) * static_cast<double>(H);
  if (!(beta >= 1.0 && beta <= upper))
    throw ConfigError(to_string(method) + ": beta must lie in [1, " +
                      (method == BaselineMethod::local_sgd ? std::string("K") : std::string("K*H")) + "]");
}

namespace {

void check_batch_fits(const Partition& partition, Index H) {
  for (int k = 0; k < partition.num_blocks(); ++k)
    if (partition.block_size(k) < H)
      throw ConfigError("H=" + std::to_string(H) + " exceeds block " + std::to_string(k) + " of size " +
                        std::to_string(partition.block_size(k)));
}

struct Setup {
  int K;
  Index n;
};

Setup prepare(const Dataset& ds, const Partition& partition, const LossModel& model,
              const BaselineConfig& cfg, const RunOptions& opts) {
  detail::validate_problem(ds, partition, model, cfg.lambda);
  cfg.validate(partition.num_blocks());
  opts.validate();
  check_batch_fits(partition, cfg.H);
  return {partition.num_blocks(), ds.size()};
}

}  // namespace

Trace run_minibatch_cd(const Dataset& ds, const Partition& partition, const LossModel& model,
                       const BaselineConfig& cfg, const RunOptions& opts) {
  if (cfg.method != BaselineMethod::minibatch_cd) throw ConfigError("config is not for minibatch_cd");
  const auto [K, n] = prepare(ds, partition, model, cfg, opts);
  const double lambda = cfg.lambda;
  const double lambda_n = lambda * static_cast<double>(n);
  const double scale = cfg.beta / (static_cast<double>(K) * static_cast<double>(cfg.H));

  Trace trace;
  trace.method = "minibatch_cd";
  detail::Recorder recorder(ds, lambda, model, opts, trace);
  detail::RecomputeSchedule recompute(cfg.recompute_epochs, n);
  BulkSyncRuntime runtime(K, ds.dim(), opts.execution);

  std::vector<Vector> alpha_blocks;
  for (int k = 0; k < K; ++k) alpha_blocks.push_back(Vector::Zero(partition.block_size(k)));
  Vector w = Vector::Zero(ds.dim());
  Vector alpha = detail::assemble_alpha(alpha_blocks, partition, n);
  double best_dual = recorder.record(0, w, &alpha, runtime.ledger()).dual;
  int below_best = 0;

  for (int t = 1; t <= cfg.T; ++t) {
    auto task = [&](int k, const Message& down) {
      const auto& block = partition.blocks[static_cast<std::size_t>(k)];
      const Vector& a = alpha_blocks[static_cast<std::size_t>(k)];
      std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k)));
      Vector delta_alpha = Vector::Zero(a.size());
      Vector delta_w = Vector::Zero(ds.dim());
      for (Index r : detail::sample_without_replacement(a.size(), cfg.H, rng)) {
        const Index i = block[static_cast<std::size_t>(r)];
        const double delta = coordinate_update(ds, i, a(r), down.payload, lambda, model);
        delta_alpha(r) = delta;
        if (delta != 0.0) ds.add_scaled(i, delta / lambda_n, delta_w);
      }
      return WorkerReply<Vector>{reduce_message(t, k, std::move(delta_w)), std::move(delta_alpha),
                                 static_cast<std::uint64_t>(cfg.H)};
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
      if (rec.dual < best_dual - 1e-10 * (1.0 + std::abs(best_dual))) {
        if (++below_best > 5) trace.diverged = true;
      } else {
        below_best = 0;
      }
      best_dual = std::max(best_dual, rec.dual);
      if (recorder.reached_target()) break;
    }
  }

  trace.ledger = runtime.ledger();
  trace.alpha = detail::assemble_alpha(alpha_blocks, partition, n);
  trace.w = std::move(w);
  return trace;
}

namespace {

// Shared driver for the two Pegasos variants; they differ only in the worker task.
template <typename Task>
Trace run_primal_method(const Dataset& ds, const Partition& partition, const LossModel& model,
                        const BaselineConfig& cfg, const RunOptions& opts, double scale, Task make_task) {
  const int K = partition.num_blocks();
  Trace trace;
  trace.method = to_string(cfg.method);
  detail::Recorder recorder(ds, cfg.lambda, model, opts, trace);
  BulkSyncRuntime runtime(K, ds.dim(), opts.execution);
  Vector w = Vector::Zero(ds.dim());
  recorder.record(0, w, nullptr, runtime.ledger());

  for (int t = 1; t <= cfg.T; ++t) {
    auto merge = [&](std::span<const WorkerReply<int>> replies) {
      Vector sum = Vector::Zero(ds.dim());
      for (const auto& r : replies) sum += r.message.payload;
      w += scale * sum;
    };
    runtime.execute_round<int>(t, w, make_task(t), merge);
    if (recorder.due(t, cfg.T)) {
      recorder.record(t, w, nullptr, runtime.ledger());
      if (recorder.reached_target()) break;
    }
  }
  trace.ledger = runtime.ledger();
  trace.w = std::move(w);
  return trace;
}

double step_size(double lambda, std::uint64_t tau) { return 1.0 / (lambda * static_cast<double>(tau)); }

}  // namespace

Trace run_minibatch_sgd(const Dataset& ds, const Partition& partition, const LossModel& model,
                        const BaselineConfig& cfg, const RunOptions& opts) {
  if (cfg.method != BaselineMethod::minibatch_sgd) throw ConfigError("config is not for minibatch_sgd");
  const auto [K, n] = prepare(ds, partition, model, cfg, opts);
  const double scale = cfg.beta / (static_cast<double>(K) * static_cast<double>(cfg.H));
  const bool by_round = cfg.effective_schedule() == StepSchedule::by_round;

  auto make_task = [&](int t) {
    return [&, t](int k, const Message& down) {
      const auto& block = partition.blocks[static_cast<std::size_t>(k)];
      const Vector& w = down.payload;
      std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k)));
      const auto picks = detail::sample_without_replacement(static_cast<Index>(block.size()), cfg.H, rng);
      // sum over the H sampled points of -eta (lambda w + l'(x^T w) x), all against the same w
      Vector delta_w = Vector::Zero(ds.dim());
      double shrink = 0.0;
      for (std::size_t h = 0; h < picks.size(); ++h) {
        const Index i = block[static_cast<std::size_t>(picks[h])];
        const std::uint64_t tau = by_round ? static_cast<std::uint64_t>(t)
                                           : static_cast<std::uint64_t>(t - 1) * static_cast<std::uint64_t>(cfg.H) + h + 1;
        const double eta = step_size(cfg.lambda, tau);
        shrink += eta * cfg.lambda;
        const double g = loss_derivative(model, ds.dot(i, w), ds.label(i));
        if (g != 0.0) ds.add_scaled(i, -eta * g, delta_w);
      }
      delta_w -= shrink * w;
      return WorkerReply<int>{reduce_message(t, k, std::move(delta_w)), 0, static_cast<std::uint64_t>(cfg.H)};
    };
  };
  (void)n;
  return run_primal_method(ds, partition, model, cfg, opts, scale, make_task);
}

Trace run_local_sgd(const Dataset& ds, const Partition& partition, const LossModel& model,
                    const BaselineConfig& cfg, const RunOptions& opts) {
  if (cfg.method != BaselineMethod::local_sgd) throw ConfigError("config is not for local_sgd");
  const auto [K, n] = prepare(ds, partition, model, cfg, opts);
  const double scale = cfg.beta / static_cast<double>(K);
  const bool by_round = cfg.effective_schedule() == StepSchedule::by_round;

  auto make_task = [&](int t) {
    return [&, t](int k, const Message& down) {
      const auto& block = partition.blocks[static_cast<std::size_t>(k)];
      std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k)));
      const auto picks = detail::sample_without_replacement(static_cast<Index>(block.size()), cfg.H, rng);
      Vector w = down.payload;
      for (std::size_t h = 0; h < picks.size(); ++h) {
        const Index i = block[static_cast<std::size_t>(picks[h])];
        const std::uint64_t tau = by_round ? static_cast<std::uint64_t>(t)
                                           : static_cast<std::uint64_t>(t - 1) * static_cast<std::uint64_t>(cfg.H) + h + 1;
        const double eta = step_size(cfg.lambda, tau);
        const double g = loss_derivative(model, ds.dot(i, w), ds.label(i));
        w *= 1.0 - eta * cfg.lambda;
        if (g != 0.0) ds.add_scaled(i, -eta * g, w);
      }
      Vector delta_w = w - down.payload;
      return WorkerReply<int>{reduce_message(t, k, std::move(delta_w)), 0, static_cast<std::uint64_t>(cfg.H)};
    };
  };
  (void)n;
  return run_primal_method(ds, partition, model, cfg, opts, scale, make_task);
}

Trace run_baseline(const Dataset& ds, const Partition& partition, const LossModel& model,
                   const BaselineConfig& cfg, const RunOptions& opts) {
  switch (cfg.method) {
    case BaselineMethod::minibatch_cd: return run_minibatch_cd(ds, partition, model, cfg, opts);
    case BaselineMethod::minibatch_sgd: return run_minibatch_sgd(ds, partition, model, cfg, opts);
    case BaselineMethod::local_sgd: return run_local_sgd(ds, partition, model, cfg, opts);
  }
  throw ConfigError("unknown baseline method");
}

}  // namespace cocoa
