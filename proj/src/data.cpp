#include "cocoa/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace cocoa {

namespace {

using Triplet = Eigen::Triplet<double, Index>;

SparseRows build_rows(Index n, Index d, const std::vector<Triplet>& entries) {
  SparseRows m(n, d);
  m.setFromTriplets(entries.begin(), entries.end());
  m.prune(0.0);
  m.makeCompressed();
  return m;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view tok, std::size_t line, const char* what) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  return v;
}

}  // namespace

Vector Dataset::squared_norms() const {
  Vector out(size());
  for (Index i = 0; i < size(); ++i) out(i) = points.row(i).squaredNorm();
  return out;
}

double Dataset::max_norm() const {
  double best = 0.0;
  for (Index i = 0; i < size(); ++i) best = std::max(best, points.row(i).norm());
  return best;
}

void Dataset::require_nonempty() const {
  if (empty()) throw DataError("empty dataset");
}

void Dataset::require_binary_labels() const {
  for (Index i = 0; i < size(); ++i)
    if (labels(i) != 1.0 && labels(i) != -1.0)
      throw DataError("label " + std::to_string(labels(i)) + " at point " + std::to_string(i) +
                      " is not +1/-1");
}

std::uint64_t Dataset::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const Index n = size(), d = dim();
  h = fnv1a(h, &n, sizeof n);
  h = fnv1a(h, &d, sizeof d);
  h = fnv1a(h, labels.data(), sizeof(double) * static_cast<std::size_t>(labels.size()));
  for (Index i = 0; i < n; ++i) {
    for (SparseRows::InnerIterator it(points, i); it; ++it) {
      const Index j = it.index();
      const double v = it.value();
      h = fnv1a(h, &i, sizeof i);
      h = fnv1a(h, &j, sizeof j);
      h = fnv1a(h, &v, sizeof v);
    }
  }
  return h;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) return false;
  if (a.labels != b.labels) return false;
  for (Index i = 0; i < a.size(); ++i) {
    SparseRows::InnerIterator ia(a.points, i), ib(b.points, i);
    for (; ia && ib; ++ia, ++ib)
      if (ia.index() != ib.index() || ia.value() != ib.value()) return false;
    if (ia || ib) return false;
  }
  return true;
}

Dataset dataset_from_dense(const Matrix& rows, const Vector& labels) {
  if (rows.rows() != labels.size()) throw DataError("row count does not match label count");
  std::vector<Triplet> entries;
  for (Index i = 0; i < rows.rows(); ++i)
    for (Index j = 0; j < rows.cols(); ++j)
      if (rows(i, j) != 0.0) entries.emplace_back(i, j, rows(i, j));
  return Dataset{build_rows(rows.rows(), rows.cols(), entries), labels};
}

Dataset parse_libsvm(std::istream& in, std::optional<Index> dim) {
  std::vector<Triplet> entries;
  std::vector<double> labels;
  Index max_index = 0;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const Index row = static_cast<Index>(labels.size());
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string_view {
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      const std::size_t start = pos;
      while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      return line.substr(start, pos - start);
    };

    labels.push_back(parse_real(next_token(), line_no, "label"));
    Index prev = 0;
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, "expected idx:val, got '" + std::string(tok) + "'");
      Index idx = 0;
      const auto idx_tok = tok.substr(0, colon);
      auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size() || idx < 1)
        throw ParseError(line_no, "bad feature index '" + std::string(idx_tok) + "'");
      if (idx <= prev)
        throw ParseError(line_no, "feature indices not strictly ascending at " + std::to_string(idx));
      prev = idx;
      const double v = parse_real(tok.substr(colon + 1), line_no, "feature value");
      if (dim && idx > *dim)
        throw ParseError(line_no, "feature index " + std::to_string(idx) + " exceeds dimension " +
                                      std::to_string(*dim));
      max_index = std::max(max_index, idx);
      if (v != 0.0) entries.emplace_back(row, idx - 1, v);
    }
  }

  const Index n = static_cast<Index>(labels.size());
  const Index d = dim.value_or(max_index);
  Dataset ds{build_rows(n, d, entries), Vector(n)};
  for (Index i = 0; i < n; ++i) ds.labels(i) = labels[static_cast<std::size_t>(i)];
  return ds;
}

Dataset parse_libsvm_string(const std::string& text, std::optional<Index> dim) {
  std::istringstream in(text);
  return parse_libsvm(in, dim);
}

Dataset load_libsvm(const std::string& path, std::optional<Index> dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  try {
    return parse_libsvm(in, dim);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

void write_libsvm(std::ostream& out, const Dataset& ds) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  for (Index i = 0; i < ds.size(); ++i) {
    out << ds.labels(i);
    for (SparseRows::InnerIterator it(ds.points, i); it; ++it)
      out << ' ' << (it.index() + 1) << ':' << it.value();
    out << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

ScaledDataset scale_to_unit_norm(const Dataset& ds) {
  ds.require_nonempty();
  const double m = ds.max_norm();
  if (m == 0.0) throw DataError("zero data");
  ScaledDataset out{ds, m};
  if (m != 1.0) out.data.points /= m;
  return out;
}

Index Partition::n_tilde() const {
  Index best = 0;
  for (const auto& b : blocks) best = std::max(best, static_cast<Index>(b.size()));
  return best;
}

Index Partition::total() const {
  Index total = 0;
  for (const auto& b : blocks) total += static_cast<Index>(b.size());
  return total;
}

std::vector<Index> Partition::sizes() const {
  std::vector<Index> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(static_cast<Index>(b.size()));
  return out;
}

std::vector<int> Partition::owners() const {
  std::vector<int> owner(static_cast<std::size_t>(total()), -1);
  for (int k = 0; k < num_blocks(); ++k)
    for (Index i : blocks[k]) owner[static_cast<std::size_t>(i)] = k;
  return owner;
}

void Partition::validate(Index n) const {
  if (blocks.empty()) throw DataError("partition has no blocks");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  Index count = 0;
  for (const auto& b : blocks) {
    for (Index i : b) {
      if (i < 0 || i >= n) throw DataError("partition index " + std::to_string(i) + " out of range");
      if (seen[static_cast<std::size_t>(i)]++)
        throw DataError("partition index " + std::to_string(i) + " assigned twice");
      ++count;
    }
  }
  if (count != n) throw DataError("partition does not cover all points");
}

namespace {

Partition chunk(std::vector<Index> order, int num_blocks) {
  const Index n = static_cast<Index>(order.size());
  Partition p;
  p.blocks.resize(static_cast<std::size_t>(num_blocks));
  const Index base = n / num_blocks, extra = n % num_blocks;
  Index start = 0;
  for (int k = 0; k < num_blocks; ++k) {
    const Index len = base + (k < extra ? 1 : 0);
    auto& b = p.blocks[static_cast<std::size_t>(k)];
    b.assign(order.begin() + start, order.begin() + start + len);
    std::sort(b.begin(), b.end());
    start += len;
  }
  return p;
}

void check_block_count(Index n, int num_blocks) {
  if (num_blocks < 1) throw ConfigError("K must be at least 1");
  if (num_blocks > n)
    throw ConfigError("K=" + std::to_string(num_blocks) + " exceeds the number of points n=" +
                      std::to_string(n));
}

}  // namespace

Partition partition_uniform(Index n, int num_blocks, std::uint64_t seed) {
  check_block_count(n, num_blocks);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return chunk(std::move(order), num_blocks);
}

Partition partition_ordered(Index n, int num_blocks) {
  check_block_count(n, num_blocks);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  return chunk(std::move(order), num_blocks);
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.d < 1) throw ConfigError("synthetic data needs n >= 1 and d >= 1");
  if (!(spec.sparsity > 0.0 && spec.sparsity <= 1.0))
    throw ConfigError("sparsity must lie in (0, 1]");
  if (!(spec.label_noise >= 0.0 && spec.label_noise <= 1.0))
    throw ConfigError("label noise must lie in [0, 1]");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Vector hyperplane(spec.d);
  for (Index j = 0; j < spec.d; ++j) hyperplane(j) = gauss(rng);

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(static_cast<double>(spec.n * spec.d) * spec.sparsity) + 16);
  Vector labels(spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    double margin = 0.0;
    for (Index j = 0; j < spec.d; ++j) {
      if (spec.sparsity < 1.0 && unif(rng) >= spec.sparsity) continue;
      const double v = gauss(rng);
      entries.emplace_back(i, j, v);
      margin += v * hyperplane(j);
    }
    double y = margin >= 0.0 ? 1.0 : -1.0;
    if (spec.label_noise > 0.0 && unif(rng) < spec.label_noise) y = -y;
    labels(i) = y;
  }

  Dataset ds{build_rows(spec.n, spec.d, entries), labels};
  if (ds.max_norm() == 0.0) return ds;
  return scale_to_unit_norm(ds).data;
}

BlockDataset gen_orthogonal_blocks(int num_blocks, Index n_per_block, Index d_per_block,
                                   std::uint64_t seed) {
  if (num_blocks < 1 || n_per_block < 1 || d_per_block < 1)
    throw ConfigError("orthogonal blocks need K, n_per_block, d_per_block >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  const Index n = num_blocks * n_per_block;
  const Index d = num_blocks * d_per_block;
  std::vector<Triplet> entries;
  Vector labels(n);
  Partition partition;
  partition.blocks.resize(static_cast<std::size_t>(num_blocks));
  for (int k = 0; k < num_blocks; ++k) {
    for (Index r = 0; r < n_per_block; ++r) {
      const Index i = k * n_per_block + r;
      partition.blocks[static_cast<std::size_t>(k)].push_back(i);
      for (Index c = 0; c < d_per_block; ++c) entries.emplace_back(i, k * d_per_block + c, gauss(rng));
      labels(i) = coin(rng) ? 1.0 : -1.0;
    }
  }
  Dataset ds{build_rows(n, d, entries), labels};
  return BlockDataset{scale_to_unit_norm(ds).data, std::move(partition)};
}

}  // namespace cocoa
