#include "cocoa/trace.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cocoa {

void RunOptions::validate() const {
  if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (stop_suboptimality < 0.0) throw ConfigError("stop_suboptimality must be non-negative");
}

namespace {

// Shortest representation that round-trips; stable across runs.
std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_field(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError("bad CSV number '" + s + "'");
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.round << ',' << r.coordinate_updates << ',' << format_real(r.epochs) << ','
        << format_real(r.primal) << ',' << format_real(r.dual) << ',' << format_real(r.gap) << ','
        << r.vectors << ',' << format_real(r.synthetic_time) << '\n';
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader) throw DataError("unexpected trace CSV header");
  std::vector<TraceRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw DataError("trace CSV row has " + std::to_string(f.size()) + " fields");
    TraceRecord r;
    r.round = static_cast<int>(parse_field(f[0]));
    r.coordinate_updates = static_cast<std::uint64_t>(parse_field(f[1]));
    r.epochs = parse_field(f[2]);
    r.primal = parse_field(f[3]);
    r.dual = parse_field(f[4]);
    r.gap = parse_field(f[5]);
    r.vectors = static_cast<std::uint64_t>(parse_field(f[6]));
    r.synthetic_time = parse_field(f[7]);
    out.push_back(r);
  }
  return out;
}

std::vector<double> suboptimality_series(const Trace& trace, double p_star) {
  std::vector<double> out;
  out.reserve(trace.records.size());
  for (const auto& r : trace.records) out.push_back(r.primal - p_star);
  return out;
}

std::optional<TargetHit> first_hit(const Trace& trace, double p_star, double target) {
  for (const auto& r : trace.records)
    if (r.primal - p_star <= target) return TargetHit{r.round, r.vectors};
  return std::nullopt;
}

}  // namespace cocoa
