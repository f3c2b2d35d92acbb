#pragma once

#include <json.hpp>

#include "cocoa/data.hpp"
#include "cocoa/loss.hpp"
#include "cocoa/types.hpp"

namespace cocoa {

/// Largest n for which sigma_min builds the dense n x n Gram matrix.
inline constexpr Index kSigmaMinCap = 2000;

/// Data/partition complexity constant
///
///   sigma_min = max_alpha (sum_k ||X_[k] alpha_[k]||^2 - ||X alpha||^2) / ||alpha||^2,
///
/// i.e. the largest eigenvalue of BlockDiag(G) - G with G_ij = x_i^T x_j, where
/// BlockDiag keeps the within-block entries. Clamped at 0 from below.
/// Throws ConfigError above kSigmaMinCap points; n_tilde is then a valid upper bound.
double sigma_min(const Dataset& ds, const Partition& partition);

/// The matrix BlockDiag(G) - G whose top eigenvalue is sigma_min.
Matrix cross_block_gram(const Dataset& ds, const Partition& partition);

/// Per-round contraction of LocalSDCA's local suboptimality after H steps:
///   (1 - (lambda n gamma / (1 + lambda n gamma)) / n_tilde)^H
template <typename Scalar>
Scalar theta_local_sdca(Scalar lambda, Index n, Scalar gamma, Index n_tilde, Index H) {
  if (!(gamma > Scalar(0))) throw ConfigError("theory requires smooth loss (gamma > 0)");
  if (H < 1) throw ConfigError("H must be at least 1");
  if (n_tilde < 1) throw ConfigError("n_tilde must be at least 1");
  const Scalar lng = lambda * Scalar(n) * gamma;
  const Scalar base = Scalar(1) - lng / (Scalar(1) + lng) / Scalar(n_tilde);
  using std::pow;
  return pow(base, Scalar(H));
}

/// Per-round factor of the global dual suboptimality bound:
///   1 - (1 - theta) (1/K) lambda n gamma / (sigma + lambda n gamma)
template <typename Scalar>
Scalar rate_per_round(int K, Scalar theta, Scalar lambda, Index n, Scalar gamma, Scalar sigma) {
  const Scalar lng = lambda * Scalar(n) * gamma;
  return Scalar(1) - (Scalar(1) - theta) / Scalar(K) * lng / (sigma + lng);
}

/// Bound on E[D(alpha*) - D(alpha^(T))] after T rounds, starting from a dual
/// suboptimality of d0_gap (at most 1 when alpha^(0) = 0).
template <typename Scalar>
Scalar rate_bound(int T, int K, Scalar theta, Scalar lambda, Index n, Scalar gamma, Scalar sigma,
                  Scalar d0_gap) {
  using std::pow;
  return pow(rate_per_round(K, theta, lambda, n, gamma, sigma), Scalar(T)) * d0_gap;
}

struct TheoryReport {
  double sigma_min = 0.0;
  double theta = 0.0;
  double rate_per_round = 1.0;
  double bound_at_T = 1.0;
  double gamma = 0.0;
  Index n_tilde = 0;
  Index n = 0;
  int K = 1;
  Index H = 1;
  int T = 1;
  double lambda = 0.0;
  double d0_gap = 1.0;
};

/// Evaluates every constant for a LocalSDCA-driven run. d0_gap defaults to the
/// lambda-free bound 1 valid for alpha^(0) = 0.
TheoryReport theory_report(const Dataset& ds, const Partition& partition, const LossModel& model,
                           double lambda, Index H, int T, double d0_gap = 1.0);

void to_json(nlohmann::json& j, const TheoryReport& r);
void from_json(const nlohmann::json& j, TheoryReport& r);

/// Dual improvement still available on block k with every other block fixed:
/// D(alpha with block k solved exactly) - D(alpha). Accurate to `tol`.
double local_suboptimality(const Dataset& ds, const Partition& partition, int k, const Vector& alpha,
                           const LossModel& model, double lambda, double tol = 1e-10);

}  // namespace cocoa
