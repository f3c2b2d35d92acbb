#include "cocoa/runtime.hpp"

namespace cocoa {

std::string to_string(CountDirection dir) {
  switch (dir) {
    case CountDirection::up: return "up";
    case CountDirection::down: return "down";
    case CountDirection::both: return "both";
  }
  return "both";
}

CountDirection parse_count_direction(const std::string& text) {
  if (text == "up") return CountDirection::up;
  if (text == "down") return CountDirection::down;
  if (text == "both") return CountDirection::both;
  throw ConfigError("count direction must be up, down or both, got '" + text + "'");
}

LedgerReport ledger_report(const CommLedger& ledger) {
  LedgerReport r;
  r.vectors_up = ledger.vectors_up;
  r.vectors_down = ledger.vectors_down;
  r.vectors_total = ledger.vectors_up + ledger.vectors_down;
  r.coordinate_updates = ledger.coordinate_updates;
  r.rounds = ledger.per_round.size();
  r.updates_per_vector = r.vectors_total == 0 ? 0.0
                                              : static_cast<double>(r.coordinate_updates) /
                                                    static_cast<double>(r.vectors_total);
  r.per_round = ledger.per_round;
  return r;
}

void to_json(nlohmann::json& j, const LedgerReport& r) {
  j = nlohmann::json{{"vectors_up", r.vectors_up},
                     {"vectors_down", r.vectors_down},
                     {"vectors_total", r.vectors_total},
                     {"coordinate_updates", r.coordinate_updates},
                     {"rounds", r.rounds},
                     {"updates_per_vector", r.updates_per_vector},
                     {"per_round", r.per_round}};
}

void from_json(const nlohmann::json& j, LedgerReport& r) {
  j.at("vectors_up").get_to(r.vectors_up);
  j.at("vectors_down").get_to(r.vectors_down);
  j.at("vectors_total").get_to(r.vectors_total);
  j.at("coordinate_updates").get_to(r.coordinate_updates);
  j.at("rounds").get_to(r.rounds);
  j.at("updates_per_vector").get_to(r.updates_per_vector);
  j.at("per_round").get_to(r.per_round);
}

}  // namespace cocoa
