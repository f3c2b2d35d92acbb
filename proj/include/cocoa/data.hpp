#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cocoa/types.hpp"

namespace cocoa {

/// A labeled sparse dataset. Point i is row i of `points` (n x d).
struct Dataset {
  SparseRows points;
  Vector labels;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
  bool empty() const { return points.rows() == 0; }

  auto point(Index i) const { return points.row(i); }
  double label(Index i) const { return labels(i); }

  /// x_i^T v
  double dot(Index i, const Vector& v) const {
    double s = 0.0;
    for (SparseRows::InnerIterator it(points, i); it; ++it) s += it.value() * v(it.index());
    return s;
  }
  /// v += a * x_i
  void add_scaled(Index i, double a, Vector& v) const {
    for (SparseRows::InnerIterator it(points, i); it; ++it) v(it.index()) += a * it.value();
  }

  /// Squared Euclidean norms of all points.
  Vector squared_norms() const;
  /// Largest Euclidean point norm.
  double max_norm() const;
  std::uint64_t nnz() const { return static_cast<std::uint64_t>(points.nonZeros()); }

  /// Throws DataError("empty dataset") when there are no points.
  void require_nonempty() const;
  /// Throws DataError unless every label is exactly -1 or +1.
  void require_binary_labels() const;

  /// Content hash over shape, labels and stored entries. Used to key caches.
  std::uint64_t fingerprint() const;

  friend bool operator==(const Dataset& a, const Dataset& b);
};

/// Builds a dataset from dense rows, dropping zeros.
Dataset dataset_from_dense(const Matrix& rows, const Vector& labels);

/// Reads LIBSVM/SVMlight text: `<label> <idx>:<val> ...` with 1-based ascending idx.
/// Blank lines and `#` comments are skipped. `dim` forces the feature dimension;
/// otherwise the largest observed index is used.
Dataset parse_libsvm(std::istream& in, std::optional<Index> dim = std::nullopt);
Dataset parse_libsvm_string(const std::string& text, std::optional<Index> dim = std::nullopt);
Dataset load_libsvm(const std::string& path, std::optional<Index> dim = std::nullopt);

/// Writes in the format accepted by parse_libsvm, with round-trip precision.
void write_libsvm(std::ostream& out, const Dataset& ds);

struct ScaledDataset {
  Dataset data;
  /// The global divisor: max_i ||x_i|| of the input.
  double scale = 1.0;
};

/// Divides every point by the largest point norm so that max_i ||x_i|| == 1.
ScaledDataset scale_to_unit_norm(const Dataset& ds);

/// Disjoint assignment of point indices to K workers.
struct Partition {
  std::vector<std::vector<Index>> blocks;

  int num_blocks() const { return static_cast<int>(blocks.size()); }
  Index block_size(int k) const { return static_cast<Index>(blocks[k].size()); }
  /// Size of the largest block.
  Index n_tilde() const;
  /// Total number of indices across blocks.
  Index total() const;
  std::vector<Index> sizes() const;
  /// owner[i] is the block holding index i. Requires a valid partition.
  std::vector<int> owners() const;

  /// Throws DataError unless the blocks exactly cover {0..n-1} without overlap.
  void validate(Index n) const;

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Random shuffle, then balanced contiguous chunks. Block contents are sorted.
Partition partition_uniform(Index n, int num_blocks, std::uint64_t seed);

/// Contiguous chunks in storage order, no shuffle.
Partition partition_ordered(Index n, int num_blocks);

struct SyntheticSpec {
  Index n = 1000;
  Index d = 100;
  double sparsity = 1.0;
  double label_noise = 0.0;
  std::uint64_t seed = 1;
};

/// Gaussian features at the given expected density, labels from a random
/// hyperplane with flip probability `label_noise`, scaled to unit max-norm.
Dataset gen_synthetic(const SyntheticSpec& spec);

struct BlockDataset {
  Dataset data;
  Partition partition;
};

/// K groups of points; group k lives only on features [k*d_per_block, (k+1)*d_per_block),
/// so points in different groups are orthogonal. The partition follows the groups.
BlockDataset gen_orthogonal_blocks(int num_blocks, Index n_per_block, Index d_per_block,
                                   std::uint64_t seed);

}  // namespace cocoa
