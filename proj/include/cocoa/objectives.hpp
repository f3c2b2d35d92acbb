#pragma once

#include <span>

#include "cocoa/data.hpp"
#include "cocoa/loss.hpp"
#include "cocoa/types.hpp"

namespace cocoa {

/// Dual iterate alpha (indexed by data point) and its primal image w = A alpha,
/// where column i of A is x_i / (lambda n).
struct DualState {
  Vector alpha;
  Vector w;
  double lambda = 1.0;

  static DualState zeros(const Dataset& ds, double lambda);
};

/// w(alpha) = (1 / (lambda n)) sum_i alpha_i x_i
Vector primal_from_dual(const Vector& alpha, const Dataset& ds, double lambda);

/// P(w) = lambda/2 ||w||^2 + (1/n) sum_i l(w^T x_i; y_i)
double primal_value(const Vector& w, const Dataset& ds, double lambda, const LossModel& model);

/// D(alpha) = -lambda/2 ||A alpha||^2 - (1/n) sum_i l*(-alpha_i).
/// -infinity when any alpha_i is outside the conjugate domain.
double dual_value(const Vector& alpha, const Dataset& ds, double lambda, const LossModel& model);

/// P(w(alpha)) - D(alpha), using the state's stored w.
double duality_gap(const DualState& state, const Dataset& ds, const LossModel& model);

/// max_j |w - A alpha|_j. The state invariant asks for <= 1e-8 (1 + ||w||_inf).
double consistency_error(const DualState& state, const Dataset& ds);

/// A_[k] alpha_blk, with alpha_blk ordered like `block`.
Vector block_image(std::span<const Index> block, const Vector& alpha_blk, const Dataset& ds,
                   double lambda);

Vector gather(const Vector& alpha, std::span<const Index> block);
void scatter_add(Vector& alpha, std::span<const Index> block, const Vector& delta, double scale = 1.0);

/// Local dual objective of one block with the other blocks' image fixed in w_bar:
///   D_k = -lambda/2 ||w_bar + A_[k] alpha_blk||^2 - (1/n) sum_{i in I_k} l*(-alpha_i) + lambda/2 ||w_bar||^2
double local_dual_value(const Vector& alpha_blk, const Vector& w_bar, std::span<const Index> block,
                        const Dataset& ds, double lambda, const LossModel& model);

/// Local primal objective of one block:
///   P_k = (1/n) sum_{i in I_k} l((w_bar + w_k)^T x_i) + lambda/2 ||w_k||^2
double local_primal_value(const Vector& w_k, const Vector& w_bar, std::span<const Index> block,
                          const Dataset& ds, double lambda, const LossModel& model);

/// P_k(w_k; w_bar) - D_k(alpha_blk; w_bar) for w = w_bar + w_k, evaluated as
/// (1/n) sum_{i in I_k} [l(w^T x_i) + l*(-alpha_i) + alpha_i w^T x_i].
double local_gap(const Vector& alpha_blk, const Vector& w, std::span<const Index> block,
                 const Dataset& ds, const LossModel& model);

}  // namespace cocoa
