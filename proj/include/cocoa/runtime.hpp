#pragma once

#include <cstdint>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cocoa/types.hpp"

namespace cocoa {

enum class MessageKind { broadcast_w, reduce_delta_w };

/// A d-dimensional vector in flight between the master and one worker.
struct Message {
  MessageKind kind = MessageKind::broadcast_w;
  int round = 1;
  int worker = 0;
  Vector payload;

  Index payload_len() const { return payload.size(); }
};

/// Which direction(s) count as "communicated vectors" in reports.
enum class CountDirection { up, down, both };

std::string to_string(CountDirection dir);
CountDirection parse_count_direction(const std::string& text);

/// Ground truth for communication cost: every vector that crosses the
/// master/worker boundary is recorded here.
struct CommLedger {
  std::uint64_t vectors_up = 0;    // worker -> master
  std::uint64_t vectors_down = 0;  // master -> worker
  std::uint64_t coordinate_updates = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> per_round;  // (up, down)

  std::uint64_t communicated(CountDirection dir) const {
    switch (dir) {
      case CountDirection::up: return vectors_up;
      case CountDirection::down: return vectors_down;
      case CountDirection::both: return vectors_up + vectors_down;
    }
    return 0;
  }
  std::size_t rounds() const { return per_round.size(); }

  friend bool operator==(const CommLedger&, const CommLedger&) = default;
};

struct LedgerReport {
  std::uint64_t vectors_up = 0;
  std::uint64_t vectors_down = 0;
  std::uint64_t vectors_total = 0;
  std::uint64_t coordinate_updates = 0;
  std::uint64_t rounds = 0;
  /// coordinate updates per communicated vector (both directions); 0 when nothing was sent.
  double updates_per_vector = 0.0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> per_round;

  friend bool operator==(const LedgerReport&, const LedgerReport&) = default;
};

LedgerReport ledger_report(const CommLedger& ledger);
void to_json(nlohmann::json& j, const LedgerReport& r);
void from_json(const nlohmann::json& j, LedgerReport& r);

/// Converts ledger counts into a synthetic time axis. The coefficients are
/// arbitrary units, not measurements.
struct CostModel {
  double per_vector = 1.0;
  double per_epoch = 1.0;

  double time(std::uint64_t vectors, double epochs) const {
    return per_vector * static_cast<double>(vectors) + per_epoch * epochs;
  }
};

enum class Execution { serial, parallel };

/// What a worker hands back at the end of a round: its reduce message plus any
/// worker-private result (e.g. its local dual update).
template <typename Local>
struct WorkerReply {
  Message message;
  Local local{};
  std::uint64_t coordinate_updates = 0;
};

/// Thrown when a worker task fails; the round is discarded.
class RoundAborted : public Error {
 public:
  using Error::Error;
};

/// Bulk-synchronous master/worker rounds.
///
/// Each round the master broadcasts w to all K workers, every worker runs its
/// task against that snapshot, and after the barrier the replies are merged in
/// ascending worker order. Serial and parallel execution give identical results
/// because tasks share no mutable state and the merge order is fixed.
class BulkSyncRuntime {
 public:
  BulkSyncRuntime(int workers, Index dim, Execution execution = Execution::serial)
      : workers_(workers), dim_(dim), execution_(execution) {
    if (workers < 1) throw ConfigError("runtime needs at least one worker");
  }

  int workers() const { return workers_; }
  Index dim() const { return dim_; }
  Execution execution() const { return execution_; }
  const CommLedger& ledger() const { return ledger_; }

  /// task:  WorkerReply<Local>(int worker, const Message& broadcast)
  /// merge: void(std::span<const WorkerReply<Local>>), replies ordered by worker
  template <typename Local, typename Task, typename Merge>
  void execute_round(int round, const Vector& w, Task&& task, Merge&& merge) {
    if (round < 1) throw ConfigError("rounds are numbered from 1");
    if (w.size() != dim_) throw ConfigError("broadcast vector has wrong dimension");

    std::vector<WorkerReply<Local>> replies(static_cast<std::size_t>(workers_));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers_));

    auto run_one = [&](int k) {
      try {
        const Message down{MessageKind::broadcast_w, round, k, w};
        replies[static_cast<std::size_t>(k)] = task(k, down);
      } catch (...) {
        failures[static_cast<std::size_t>(k)] = std::current_exception();
      }
    };

    if (execution_ == Execution::parallel && workers_ > 1) {
      std::vector<std::jthread> threads;
      threads.reserve(static_cast<std::size_t>(workers_));
      for (int k = 0; k < workers_; ++k) threads.emplace_back(run_one, k);
    } else {
      for (int k = 0; k < workers_; ++k) run_one(k);
    }

    for (int k = 0; k < workers_; ++k) {
      if (auto& f = failures[static_cast<std::size_t>(k)]) {
        try {
          std::rethrow_exception(f);
        } catch (const std::exception& e) {
          throw RoundAborted("round " + std::to_string(round) + " aborted: worker " +
                             std::to_string(k) + " failed: " + e.what());
        }
      }
      const Message& up = replies[static_cast<std::size_t>(k)].message;
      if (up.kind != MessageKind::reduce_delta_w || up.worker != k || up.round != round ||
          up.payload_len() != dim_)
        throw RoundAborted("round " + std::to_string(round) + " aborted: worker " +
                           std::to_string(k) + " sent a malformed reduce message");
    }

    merge(std::span<const WorkerReply<Local>>(replies));

    std::uint64_t updates = 0;
    for (const auto& r : replies) updates += r.coordinate_updates;
    const auto k = static_cast<std::uint64_t>(workers_);
    ledger_.vectors_up += k;
    ledger_.vectors_down += k;
    ledger_.coordinate_updates += updates;
    ledger_.per_round.emplace_back(k, k);
  }

 private:
  int workers_;
  Index dim_;
  Execution execution_;
  CommLedger ledger_;
};

/// Convenience for building a worker's reduce message.
inline Message reduce_message(int round, int worker, Vector delta_w) {
  return Message{MessageKind::reduce_delta_w, round, worker, std::move(delta_w)};
}

}  // namespace cocoa
