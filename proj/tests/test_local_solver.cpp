#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "cocoa/local_solver.hpp"
#include "cocoa/objectives.hpp"
#include "oracles.hpp"

using namespace cocoa;

namespace {

const LossModel kFamilies[] = {LossModel::hinge(), LossModel::smoothed_hinge(1.0), LossModel::smoothed_hinge(0.5),
                               LossModel::logistic()};

struct Problem {
  Dataset ds;
  Partition part;
  double lambda;
  Vector alpha;
  Vector w;
};

Problem make_problem(std::uint64_t seed, const LossModel& m, Index n = 40, int K = 2, double lambda = 0.05) {
  std::mt19937_64 rng(seed);
  Problem p{gen_synthetic({n, 6, 0.7, 0.1, rng()}), {}, lambda, {}, {}};
  p.part = partition_uniform(n, K, rng());
  p.alpha = oracle::feasible_alpha(p.ds, rng, m.family == LossFamily::logistic);
  p.w = primal_from_dual(p.alpha, p.ds, lambda);
  return p;
}

}  // namespace

TEST_CASE("hinge closed form on a hand example") {
  // x = (1), y = 1, w = 0, alpha = 0, lambda n = 1: the unclipped step is 1 and sits on the boundary
  CHECK(coordinate_step(LossModel::hinge(), 1.0, 1.0, 0.0, 1.0, 0.0) == doctest::Approx(1.0));
  // already past the margin: alpha moves to 0
  CHECK(coordinate_step(LossModel::hinge(), 1.0, 1.0, 3.0, 1.0, 0.5) == doctest::Approx(-0.5));
  // negative label mirrors
  CHECK(coordinate_step(LossModel::hinge(), 1.0, 1.0, 0.0, -1.0, 0.0) == doctest::Approx(-1.0));
  // zero point: the conjugate alone is maximized at b = 1
  CHECK(coordinate_step(LossModel::hinge(), 1.0, 0.0, 0.0, 1.0, 0.2) == doctest::Approx(0.8));
}

TEST_CASE("coordinate step equals the golden-section maximizer") {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& m : kFamilies) {
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
      const double lambda_n = std::pow(10.0, -1.0 + 2.3 * u(rng));
      Vector x(5), w(5);
      for (Index j = 0; j < 5; ++j) {
        x(j) = g(rng);
        w(j) = 0.7 * g(rng);
      }
      x *= std::sqrt(0.1 + 0.9 * u(rng)) / x.norm();
      const double y = u(rng) < 0.5 ? -1.0 : 1.0;
      const double alpha = y * u(rng);
      const double step = coordinate_step(m, lambda_n, x.squaredNorm(), x.dot(w), y, alpha);
      const double ref = oracle::coordinate_argmax(m, lambda_n, x, w, y, alpha);
      worst = std::max(worst, std::abs(step - ref));
      // optimality in value as a second, tolerance-free check
      CHECK(oracle::coordinate_objective(m, lambda_n, x, w, y, alpha, step) >=
            oracle::coordinate_objective(m, lambda_n, x, w, y, alpha, ref) - 1e-12);
    }
    INFO(m.name());
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("coordinate step is idempotent") {
  std::mt19937_64 rng(4);
  for (const auto& m : kFamilies) {
    const Problem p = make_problem(rng(), m);
    const double lambda_n = p.lambda * static_cast<double>(p.ds.size());
    for (Index i = 0; i < p.ds.size(); ++i) {
      const double d1 = coordinate_update(p.ds, i, p.alpha(i), p.w, p.lambda, m);
      Vector w2 = p.w;
      p.ds.add_scaled(i, d1 / lambda_n, w2);
      const double d2 = coordinate_update(p.ds, i, p.alpha(i) + d1, w2, p.lambda, m);
      CHECK(std::abs(d2) <= 1e-8);
    }
  }
}

TEST_CASE("local_sdca: delta_w = A_k delta_alpha, counters, feasibility") {
  std::mt19937_64 rng(8);
  for (const auto& m : kFamilies) {
    for (int t = 0; t < 10; ++t) {
      const Problem p = make_problem(rng(), m);
      const auto& block = p.part.blocks[0];
      LocalSolverConfig cfg;
      cfg.H = 50;
      cfg.seed = rng();
      const LocalUpdate u = local_sdca(p.ds, block, gather(p.alpha, block), p.w, m, p.lambda, cfg);
      CHECK(u.coordinate_updates == 50);
      CHECK(u.delta_alpha.size() == static_cast<Index>(block.size()));
      const Vector expect = block_image(block, u.delta_alpha, p.ds, p.lambda);
      CHECK((u.delta_w - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
      for (std::size_t r = 0; r < block.size(); ++r) {
        const double b = p.ds.labels(block[r]) * (p.alpha(block[r]) + u.delta_alpha(static_cast<Index>(r)));
        CHECK(b >= -1e-12);
        CHECK(b <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("local_sdca never decreases the local dual") {
  std::mt19937_64 rng(9);
  for (const auto& m : kFamilies) {
    const Problem p = make_problem(rng(), m);
    const auto& block = p.part.blocks[1];
    Vector blk = gather(p.alpha, block);
    const Vector w_bar = p.w - block_image(block, blk, p.ds, p.lambda);
    double last = local_dual_value(blk, w_bar, block, p.ds, p.lambda, m);
    int decreases = 0;
    LocalSolverConfig cfg;
    cfg.H = 200;
    cfg.seed = 3;
    local_sdca(p.ds, block, blk, p.w, m, p.lambda, cfg, [&](Index, Index r, double delta) {
      blk(r) += delta;
      const double now = local_dual_value(blk, w_bar, block, p.ds, p.lambda, m);
      if (now < last - 1e-12) ++decreases;
      last = now;
    });
    CHECK(decreases == 0);
  }
}

TEST_CASE("local_sdca with H = 1 is one coordinate update at the seeded position") {
  std::mt19937_64 rng(10);
  for (const auto& m : kFamilies) {
    const Problem p = make_problem(rng(), m);
    const auto& block = p.part.blocks[0];
    LocalSolverConfig cfg;
    cfg.seed = 77;
    const LocalUpdate u = local_sdca(p.ds, block, gather(p.alpha, block), p.w, m, p.lambda, cfg);
    std::mt19937_64 pick_rng(77);
    const Index r = std::uniform_int_distribution<Index>(0, static_cast<Index>(block.size()) - 1)(pick_rng);
    const Index i = block[static_cast<std::size_t>(r)];
    const double delta = coordinate_update(p.ds, i, p.alpha(i), p.w, p.lambda, m);
    CHECK(u.delta_alpha(r) == delta);
    CHECK(u.delta_alpha.cwiseAbs().sum() == doctest::Approx(std::abs(delta)));
  }
}

TEST_CASE("local_sdca is deterministic in its seed") {
  const LossModel m = LossModel::logistic();
  const Problem p = make_problem(2, m);
  const auto& block = p.part.blocks[0];
  LocalSolverConfig cfg;
  cfg.H = 100;
  cfg.seed = 5;
  const auto a = local_sdca(p.ds, block, gather(p.alpha, block), p.w, m, p.lambda, cfg);
  const auto b = local_sdca(p.ds, block, gather(p.alpha, block), p.w, m, p.lambda, cfg);
  CHECK(a.delta_alpha == b.delta_alpha);
  CHECK(a.delta_w == b.delta_w);
  cfg.seed = 6;
  const auto c = local_sdca(p.ds, block, gather(p.alpha, block), p.w, m, p.lambda, cfg);
  CHECK_FALSE(a.delta_alpha == c.delta_alpha);
  cfg.H = 0;
  CHECK_THROWS_AS(local_sdca(p.ds, block, gather(p.alpha, block), p.w, m, p.lambda, cfg), ConfigError);
}

TEST_CASE("exact block solver") {
  SUBCASE("single-point block is one closed-form step") {
    for (const auto& m : kFamilies) {
      const Problem p = make_problem(3, m);
      const std::vector<Index> block{5};
      const auto u = exact_block_solver(p.ds, block, gather(p.alpha, block), p.w, m, p.lambda, 1e-12);
      const double delta = coordinate_update(p.ds, 5, p.alpha(5), p.w, p.lambda, m);
      CHECK(u.delta_alpha(0) == doctest::Approx(delta).epsilon(1e-8).scale(1.0));
    }
  }
  SUBCASE("one block reaches the global gap tolerance") {
    for (const auto& m : kFamilies) {
      const Dataset ds = gen_synthetic({60, 8, 0.5, 0.1, 4});
      const double lambda = 0.01;
      std::vector<Index> all(60);
      std::iota(all.begin(), all.end(), Index{0});
      const auto u = exact_block_solver(ds, all, Vector::Zero(60), Vector::Zero(8), m, lambda, 1e-10);
      DualState s{u.delta_alpha, u.delta_w, lambda};
      CHECK(duality_gap(s, ds, m) <= 1e-10);
      CHECK(oracle::primal(s.w, ds, lambda, m) - oracle::dual(s.alpha, ds, lambda, m) <= 1e-10);
    }
  }
  SUBCASE("reports the last gap when the epoch cap is hit") {
    const Dataset ds = gen_synthetic({200, 8, 0.5, 0.1, 4});
    std::vector<Index> all(200);
    std::iota(all.begin(), all.end(), Index{0});
    try {
      exact_block_solver(ds, all, Vector::Zero(200), Vector::Zero(8), LossModel::hinge(), 1e-4, 1e-14, 1);
      FAIL("expected SolverError");
    } catch (const SolverError& e) {
      CHECK(e.last_gap() > 1e-14);
    }
  }
}

TEST_CASE("one random step improves the local dual by at least s / n_k times the local gap") {
  // Exact expectation over the uniformly drawn position, and a sampled check through local_sdca.
  std::mt19937_64 rng(42);
  for (const auto& m : {LossModel::smoothed_hinge(1.0), LossModel::logistic()}) {
    for (int t = 0; t < 20; ++t) {
      const Problem p = make_problem(rng(), m, 40, 2, 0.02);
      const auto& block = p.part.blocks[0];
      const Vector blk = gather(p.alpha, block);
      const Vector w_bar = p.w - block_image(block, blk, p.ds, p.lambda);
      const double lambda_n = p.lambda * static_cast<double>(p.ds.size());
      const double s = lambda_n * m.gamma() / (1.0 + lambda_n * m.gamma());
      const double nk = static_cast<double>(block.size());
      const double d0 = local_dual_value(blk, w_bar, block, p.ds, p.lambda, m);
      const double bound = s / nk * local_gap(blk, p.w, block, p.ds, m);

      double expected = 0.0;
      for (std::size_t r = 0; r < block.size(); ++r) {
        Vector b2 = blk;
        b2(static_cast<Index>(r)) += coordinate_update(p.ds, block[r], blk(static_cast<Index>(r)), p.w, p.lambda, m);
        expected += (local_dual_value(b2, w_bar, block, p.ds, p.lambda, m) - d0) / nk;
      }
      CHECK(expected >= bound - 1e-12);

      if (t < 3) {
        const int runs = 500;
        double sum = 0.0, sq = 0.0;
        for (int seed = 0; seed < runs; ++seed) {
          LocalSolverConfig cfg;
          cfg.seed = static_cast<std::uint64_t>(seed) + 1000;
          const auto u = local_sdca(p.ds, block, blk, p.w, m, p.lambda, cfg);
          const double gain = local_dual_value(blk + u.delta_alpha, w_bar, block, p.ds, p.lambda, m) - d0;
          sum += gain;
          sq += gain * gain;
        }
        const double mean = sum / runs;
        const double se = std::sqrt(std::max(0.0, sq / runs - mean * mean) / runs);
        CHECK(mean >= bound - 3.0 * se);
      }
    }
  }
}

TEST_CASE("H local steps contract the local suboptimality by Theta") {
  const LossModel m = LossModel::smoothed_hinge(1.0);
  const Problem p = make_problem(11, m, 40, 2, 0.05);
  const auto& block = p.part.blocks[1];
  const Vector blk = gather(p.alpha, block);
  const Vector w_bar = p.w - block_image(block, blk, p.ds, p.lambda);
  const auto opt = exact_block_solver(p.ds, block, blk, p.w, m, p.lambda, 1e-12);
  const double d_star = local_dual_value(blk + opt.delta_alpha, w_bar, block, p.ds, p.lambda, m);
  const double eps0 = d_star - local_dual_value(blk, w_bar, block, p.ds, p.lambda, m);
  REQUIRE(eps0 > 0.0);

  const double lambda_n = p.lambda * static_cast<double>(p.ds.size());
  const double s = lambda_n * m.gamma() / (1.0 + lambda_n * m.gamma());
  const double nk = static_cast<double>(block.size());
  for (Index H : {Index{1}, Index{5}, Index{20}}) {
    const double theta = std::pow(1.0 - s / nk, static_cast<double>(H));
    const int runs = 500;
    double sum = 0.0, sq = 0.0;
    for (int seed = 0; seed < runs; ++seed) {
      LocalSolverConfig cfg;
      cfg.H = H;
      cfg.seed = static_cast<std::uint64_t>(seed);
      const auto u = local_sdca(p.ds, block, blk, p.w, m, p.lambda, cfg);
      const double eps = d_star - local_dual_value(blk + u.delta_alpha, w_bar, block, p.ds, p.lambda, m);
      sum += eps;
      sq += eps * eps;
    }
    const double mean = sum / runs;
    const double se = std::sqrt(std::max(0.0, sq / runs - mean * mean) / runs);
    INFO("H = " << H);
    CHECK(mean <= theta * eps0 + 3.0 * se);
  }
}
