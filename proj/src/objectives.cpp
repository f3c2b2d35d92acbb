#include "cocoa/objectives.hpp"

#include <cmath>
#include <limits>

namespace cocoa {

DualState DualState::zeros(const Dataset& ds, double lambda) {
  return DualState{Vector::Zero(ds.size()), Vector::Zero(ds.dim()), lambda};
}

Vector primal_from_dual(const Vector& alpha, const Dataset& ds, double lambda) {
  ds.require_nonempty();
  const double scale = 1.0 / (lambda * static_cast<double>(ds.size()));
  Vector w = ds.points.transpose() * alpha;
  return w * scale;
}

double primal_value(const Vector& w, const Dataset& ds, double lambda, const LossModel& model) {
  ds.require_nonempty();
  const Vector margins = ds.points * w;
  double loss = 0.0;
  for (Index i = 0; i < ds.size(); ++i) loss += loss_value(model, margins(i), ds.labels(i));
  return 0.5 * lambda * w.squaredNorm() + loss / static_cast<double>(ds.size());
}

double dual_value(const Vector& alpha, const Dataset& ds, double lambda, const LossModel& model) {
  ds.require_nonempty();
  double conj = 0.0;
  for (Index i = 0; i < ds.size(); ++i) {
    const double c = conjugate_value(model, alpha(i), ds.labels(i));
    if (std::isinf(c)) return -std::numeric_limits<double>::infinity();
    conj += c;
  }
  const Vector w = primal_from_dual(alpha, ds, lambda);
  return -0.5 * lambda * w.squaredNorm() - conj / static_cast<double>(ds.size());
}

double duality_gap(const DualState& state, const Dataset& ds, const LossModel& model) {
  return primal_value(state.w, ds, state.lambda, model) -
         dual_value(state.alpha, ds, state.lambda, model);
}

double consistency_error(const DualState& state, const Dataset& ds) {
  return (state.w - primal_from_dual(state.alpha, ds, state.lambda)).lpNorm<Eigen::Infinity>();
}

Vector block_image(std::span<const Index> block, const Vector& alpha_blk, const Dataset& ds,
                   double lambda) {
  Vector w = Vector::Zero(ds.dim());
  const double scale = 1.0 / (lambda * static_cast<double>(ds.size()));
  for (std::size_t r = 0; r < block.size(); ++r) {
    const double a = alpha_blk(static_cast<Index>(r));
    if (a == 0.0) continue;
    ds.add_scaled(block[r], a, w);
  }
  return w * scale;
}

Vector gather(const Vector& alpha, std::span<const Index> block) {
  Vector out(static_cast<Index>(block.size()));
  for (std::size_t r = 0; r < block.size(); ++r) out(static_cast<Index>(r)) = alpha(block[r]);
  return out;
}

void scatter_add(Vector& alpha, std::span<const Index> block, const Vector& delta, double scale) {
  for (std::size_t r = 0; r < block.size(); ++r) alpha(block[r]) += scale * delta(static_cast<Index>(r));
}

double local_dual_value(const Vector& alpha_blk, const Vector& w_bar, std::span<const Index> block,
                        const Dataset& ds, double lambda, const LossModel& model) {
  double conj = 0.0;
  for (std::size_t r = 0; r < block.size(); ++r) {
    const double c = conjugate_value(model, alpha_blk(static_cast<Index>(r)), ds.labels(block[r]));
    if (std::isinf(c)) return -std::numeric_limits<double>::infinity();
    conj += c;
  }
  const Vector w_k = block_image(block, alpha_blk, ds, lambda);
  // ||w_bar||^2 - ||w_bar + w_k||^2 = -(2 w_bar + w_k)^T w_k, which avoids cancellation
  const double quad = -(2.0 * w_bar + w_k).dot(w_k);
  return 0.5 * lambda * quad - conj / static_cast<double>(ds.size());
}

double local_primal_value(const Vector& w_k, const Vector& w_bar, std::span<const Index> block,
                          const Dataset& ds, double lambda, const LossModel& model) {
  const Vector w = w_bar + w_k;
  double loss = 0.0;
  for (Index i : block) loss += loss_value(model, ds.dot(i, w), ds.labels(i));
  return loss / static_cast<double>(ds.size()) + 0.5 * lambda * w_k.squaredNorm();
}

double local_gap(const Vector& alpha_blk, const Vector& w, std::span<const Index> block,
                 const Dataset& ds, const LossModel& model) {
  double sum = 0.0;
  for (std::size_t r = 0; r < block.size(); ++r) {
    const Index i = block[r];
    const double a = alpha_blk(static_cast<Index>(r));
    const double margin = ds.dot(i, w);
    sum += loss_value(model, margin, ds.labels(i)) + conjugate_value(model, a, ds.labels(i)) + a * margin;
  }
  return sum / static_cast<double>(ds.size());
}

}  // namespace cocoa
