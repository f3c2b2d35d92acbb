#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cocoa/runtime.hpp"
#include "cocoa/types.hpp"

namespace cocoa {

/// One row of a convergence trace. Methods without a dual iterate (the SGD
/// baselines) report NaN for dual and gap.
struct TraceRecord {
  int round = 0;
  std::uint64_t coordinate_updates = 0;
  double epochs = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  std::uint64_t vectors = 0;
  double synthetic_time = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  std::string method;
  std::vector<TraceRecord> records;
  CommLedger ledger;
  /// Set by mini-batch CD when the dual kept decreasing for several rounds.
  bool diverged = false;
  Vector w;
  Vector alpha;  // empty for primal-only methods
};

/// Options shared by every bulk-synchronous method.
struct RunOptions {
  CountDirection count = CountDirection::both;
  CostModel cost;
  Execution execution = Execution::serial;
  /// Evaluate objectives every this many rounds (the last round is always recorded).
  int eval_every = 1;
  /// Stop early once P(w) - p_star <= stop_suboptimality (requires p_star).
  std::optional<double> p_star;
  double stop_suboptimality = 0.0;

  void validate() const;
};

/// Column order of the CSV trace format.
inline constexpr const char* kTraceCsvHeader =
    "round,coordinate_updates,epochs,primal,dual,gap,vectors,synthetic_time";

void write_trace_csv(std::ostream& out, const Trace& trace);
std::vector<TraceRecord> read_trace_csv(std::istream& in);

/// P(w_t) - p_star for every record.
std::vector<double> suboptimality_series(const Trace& trace, double p_star);

/// Rounds and vectors at which P - p_star first drops to `target`, if ever.
struct TargetHit {
  int round = 0;
  std::uint64_t vectors = 0;
};
std::optional<TargetHit> first_hit(const Trace& trace, double p_star, double target);

}  // namespace cocoa
