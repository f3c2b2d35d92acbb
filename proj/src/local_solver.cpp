#include "cocoa/local_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cocoa/objectives.hpp"

namespace cocoa {

void LocalSolverConfig::validate() const {
  if (H < 1) throw ConfigError("H must be at least 1");
  if (mode == LocalMode::exact && !(tol > 0.0)) throw ConfigError("exact local solver needs tol > 0");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
}

namespace {

double clip01(double b) { return std::clamp(b, 0.0, 1.0); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// Root of g(t) = c - t - r * sigmoid(t), r >= 0. g is strictly decreasing with
// slope <= -1 and the root lies in [c - r, c].
double logistic_logit_root(double c, double r) {
  double lo = c - r, hi = c;
  double t = std::clamp(c - r * sigmoid(c), lo, hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double s = sigmoid(t);
    const double g = c - t - r * s;
    if (std::abs(g) <= 1e-10) return t;
    if (g > 0.0) lo = t; else hi = t;
    const double slope = -1.0 - r * s * (1.0 - s);
    double next = t - g / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t || hi - lo <= 1e-15 * std::max(1.0, std::abs(t))) return next;
    t = next;
  }
  return t;
}

}  // namespace

double coordinate_step(const LossModel& model, double lambda_n, double sq_norm, double margin,
                       double label, double alpha) {
  const double b = label * alpha;
  switch (model.family) {
    case LossFamily::hinge: {
      if (sq_norm == 0.0) return label * 1.0 - alpha;
      const double target = clip01(b + lambda_n * (1.0 - label * margin) / sq_norm);
      return label * target - alpha;
    }
    case LossFamily::smoothed_hinge: {
      const double g = model.smoothing;
      const double target =
          clip01(b + lambda_n * (1.0 - label * margin - g * b) / (sq_norm + g * lambda_n));
      return label * target - alpha;
    }
    case LossFamily::logistic: {
      // Stationarity in b = y(alpha + delta):  -y margin + r (y alpha) - r b - logit(b) = 0
      const double r = sq_norm / lambda_n;
      const double c = -label * margin + r * b;
      const double target = sigmoid(logistic_logit_root(c, r));
      return label * target - alpha;
    }
  }
  return 0.0;
}

double coordinate_update(const Dataset& ds, Index i, double alpha_i, const Vector& w, double lambda,
                         const LossModel& model) {
  const double lambda_n = lambda * static_cast<double>(ds.size());
  return coordinate_step(model, lambda_n, ds.points.row(i).squaredNorm(), ds.dot(i, w), ds.label(i),
                         alpha_i);
}

LocalUpdate local_sdca(const Dataset& ds, std::span<const Index> block, const Vector& alpha_blk,
                       const Vector& w, const LossModel& model, double lambda,
                       const LocalSolverConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  const Index nk = static_cast<Index>(block.size());
  LocalUpdate out{Vector::Zero(nk), Vector::Zero(ds.dim()), 0};
  if (nk == 0) return out;

  const double lambda_n = lambda * static_cast<double>(ds.size());
  Vector w_local = w;
  Vector alpha = alpha_blk;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<Index> pick(0, nk - 1);

  for (Index h = 0; h < cfg.H; ++h) {
    const Index r = pick(rng);
    const Index i = block[static_cast<std::size_t>(r)];
    const double q = ds.points.row(i).squaredNorm();
    const double delta = coordinate_step(model, lambda_n, q, ds.dot(i, w_local), ds.label(i), alpha(r));
    alpha(r) += delta;
    out.delta_alpha(r) += delta;
    if (delta != 0.0) {
      ds.add_scaled(i, delta / lambda_n, w_local);
      ds.add_scaled(i, delta / lambda_n, out.delta_w);
    }
    if (observer) observer(h, r, delta);
  }
  out.coordinate_updates = static_cast<std::uint64_t>(cfg.H);
  return out;
}

LocalUpdate exact_block_solver(const Dataset& ds, std::span<const Index> block,
                               const Vector& alpha_blk, const Vector& w, const LossModel& model,
                               double lambda, double tol, Index max_epochs) {
  if (!(tol > 0.0)) throw ConfigError("exact block solver needs tol > 0");
  const Index nk = static_cast<Index>(block.size());
  LocalUpdate out{Vector::Zero(nk), Vector::Zero(ds.dim()), 0};
  if (nk == 0) return out;

  const double lambda_n = lambda * static_cast<double>(ds.size());
  Vector w_local = w;
  Vector alpha = alpha_blk;
  Vector sq_norms(nk);
  for (Index r = 0; r < nk; ++r) sq_norms(r) = ds.points.row(block[static_cast<std::size_t>(r)]).squaredNorm();

  double gap = local_gap(alpha, w_local, block, ds, model);
  for (Index epoch = 0; gap > tol; ++epoch) {
    if (epoch >= max_epochs)
      throw SolverError("exact block solver: gap " + std::to_string(gap) + " above tol after " +
                            std::to_string(max_epochs) + " epochs",
                        gap);
    for (Index r = 0; r < nk; ++r) {
      const Index i = block[static_cast<std::size_t>(r)];
      const double delta =
          coordinate_step(model, lambda_n, sq_norms(r), ds.dot(i, w_local), ds.label(i), alpha(r));
      if (delta == 0.0) continue;
      alpha(r) += delta;
      out.delta_alpha(r) += delta;
      ds.add_scaled(i, delta / lambda_n, w_local);
      ds.add_scaled(i, delta / lambda_n, out.delta_w);
    }
    out.coordinate_updates += static_cast<std::uint64_t>(nk);
    gap = local_gap(alpha, w_local, block, ds, model);
  }
  return out;
}

LocalUpdate solve_local(const Dataset& ds, std::span<const Index> block, const Vector& alpha_blk,
                        const Vector& w, const LossModel& model, double lambda,
                        const LocalSolverConfig& cfg) {
  if (cfg.mode == LocalMode::exact)
    return exact_block_solver(ds, block, alpha_blk, w, model, lambda, cfg.tol, cfg.max_epochs);
  return local_sdca(ds, block, alpha_blk, w, model, lambda, cfg);
}

}  // namespace cocoa
