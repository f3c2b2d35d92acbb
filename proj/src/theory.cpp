#include "cocoa/theory.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "cocoa/local_solver.hpp"
#include "cocoa/objectives.hpp"

namespace cocoa {

Matrix cross_block_gram(const Dataset& ds, const Partition& partition) {
  const Index n = ds.size();
  if (n > kSigmaMinCap)
    throw ConfigError("sigma_min: n=" + std::to_string(n) + " exceeds the dense eigen cap of " +
                      std::to_string(kSigmaMinCap) + "; use n_tilde=" +
                      std::to_string(partition.n_tilde()) + " as an upper bound");
  partition.validate(n);
  const auto owner = partition.owners();
  Matrix gram = Matrix(ds.points * ds.points.transpose());
  Matrix m = -gram;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (owner[static_cast<std::size_t>(i)] == owner[static_cast<std::size_t>(j)]) m(i, j) = 0.0;
  return m;
}

double sigma_min(const Dataset& ds, const Partition& partition) {
  ds.require_nonempty();
  if (partition.num_blocks() == 1) {
    partition.validate(ds.size());
    return 0.0;
  }
  const Matrix m = cross_block_gram(ds, partition);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("sigma_min: eigendecomposition failed");
  return std::max(0.0, solver.eigenvalues().maxCoeff());
}

TheoryReport theory_report(const Dataset& ds, const Partition& partition, const LossModel& model,
                           double lambda, Index H, int T, double d0_gap) {
  TheoryReport r;
  r.gamma = model.gamma();
  r.n = ds.size();
  r.n_tilde = partition.n_tilde();
  r.K = partition.num_blocks();
  r.H = H;
  r.T = T;
  r.lambda = lambda;
  r.d0_gap = d0_gap;
  r.sigma_min = sigma_min(ds, partition);
  r.theta = theta_local_sdca(lambda, r.n, r.gamma, r.n_tilde, H);
  r.rate_per_round = rate_per_round(r.K, r.theta, lambda, r.n, r.gamma, r.sigma_min);
  r.bound_at_T = rate_bound(T, r.K, r.theta, lambda, r.n, r.gamma, r.sigma_min, d0_gap);
  return r;
}

void to_json(nlohmann::json& j, const TheoryReport& r) {
  j = nlohmann::json{{"sigma_min", r.sigma_min}, {"theta", r.theta},   {"rate_per_round", r.rate_per_round},
                     {"bound_at_T", r.bound_at_T}, {"gamma", r.gamma}, {"n_tilde", r.n_tilde},
                     {"n", r.n},                   {"K", r.K},         {"H", r.H},
                     {"T", r.T},                   {"lambda", r.lambda}, {"d0_gap", r.d0_gap}};
}

void from_json(const nlohmann::json& j, TheoryReport& r) {
  j.at("sigma_min").get_to(r.sigma_min);
  j.at("theta").get_to(r.theta);
  j.at("rate_per_round").get_to(r.rate_per_round);
  j.at("bound_at_T").get_to(r.bound_at_T);
  j.at("gamma").get_to(r.gamma);
  j.at("n_tilde").get_to(r.n_tilde);
  j.at("n").get_to(r.n);
  j.at("K").get_to(r.K);
  j.at("H").get_to(r.H);
  j.at("T").get_to(r.T);
  j.at("lambda").get_to(r.lambda);
  j.at("d0_gap").get_to(r.d0_gap);
}

double local_suboptimality(const Dataset& ds, const Partition& partition, int k, const Vector& alpha,
                           const LossModel& model, double lambda, double tol) {
  if (k < 0 || k >= partition.num_blocks()) throw ConfigError("block index out of range");
  const auto& block = partition.blocks[static_cast<std::size_t>(k)];
  const Vector w = primal_from_dual(alpha, ds, lambda);
  const Vector alpha_blk = gather(alpha, block);
  const LocalUpdate upd = exact_block_solver(ds, block, alpha_blk, w, model, lambda, tol);
  Vector solved = alpha;
  scatter_add(solved, block, upd.delta_alpha);
  return dual_value(solved, ds, lambda, model) - dual_value(alpha, ds, lambda, model);
}

}  // namespace cocoa
