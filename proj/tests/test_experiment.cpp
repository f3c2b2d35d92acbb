#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cocoa/experiment.hpp"
#include "oracles.hpp"

using namespace cocoa;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cocoa_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig c;
  c.synthetic = SyntheticSpec{300, 15, 0.5, 0.05, 3};
  c.lambda = 1e-2;
  c.K = 4;
  c.H = 40;
  c.T = 15;
  c.out = out.string();
  return c;
}

}  // namespace

TEST_CASE("config: defaults, JSON round trip, unknown keys") {
  ExperimentConfig c;
  c.synthetic = SyntheticSpec{10, 3, 1.0, 0.0, 2};
  nlohmann::json j = c;
  for (const char* key : {"lambda", "loss", "method", "K", "H", "beta", "T", "seeds", "count_direction", "ref_tol",
                          "partition", "local_solver", "execution", "eval_every", "scale"})
    CHECK(j.contains(key));
  CHECK(j["lambda"] == 1e-4);
  CHECK(j["partition"] == "random");
  const ExperimentConfig back = j.get<ExperimentConfig>();
  CHECK(nlohmann::json(back) == j);

  nlohmann::json partial = {{"synthetic", {{"n", 10}, {"d", 3}}}, {"lambda", 0.5}};
  const auto p = partial.get<ExperimentConfig>();
  CHECK(p.lambda == 0.5);
  CHECK(p.K == 4);
  CHECK_THROWS_AS(nlohmann::json({{"lamda", 1.0}}).get<ExperimentConfig>(), ConfigError);
  CHECK_THROWS_AS(nlohmann::json({{"method", "adam"}}).get<ExperimentConfig>(), ConfigError);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.synthetic = SyntheticSpec{10, 3, 1.0, 0.0, 2};
  CHECK_NOTHROW(c.validate());
  auto bad = [&](auto mutate) {
    ExperimentConfig d = c;
    mutate(d);
    CHECK_THROWS_AS(d.validate(), ConfigError);
  };
  bad([](ExperimentConfig& d) { d.lambda = 0; });
  bad([](ExperimentConfig& d) { d.K = 0; });
  bad([](ExperimentConfig& d) { d.beta = 5.0; });  // cocoa: beta in [1, K]
  bad([](ExperimentConfig& d) { d.data_path = "x"; });
  bad([](ExperimentConfig& d) { d.synthetic.reset(); });
  bad([](ExperimentConfig& d) { d.count_direction = "left"; });
  bad([](ExperimentConfig& d) { d.seeds.clear(); });
  bad([](ExperimentConfig& d) { d.partition = "striped"; });
  ExperimentConfig mb = c;
  mb.method = Method::minibatch_cd;
  mb.beta = 400.0;  // K H = 400
  CHECK_NOTHROW(mb.validate());
}

TEST_CASE("a small-lambda config in the style of the large benchmark runs") {
  const fs::path dir = scratch("cov");
  ExperimentConfig c = small_config(dir);
  c.lambda = 1e-6;
  c.K = 4;
  c.H = 50;
  c.T = 3;
  c.reference = false;
  CHECK_NOTHROW(c.validate());
  const auto r = run_experiment(c);
  REQUIRE(r.runs.size() == 1);
  CHECK(r.runs[0].trace.records.size() == 4);
  CHECK(r.runs[0].report["reference"].is_null());
  fs::remove_all(dir);
}

TEST_CASE("run_experiment writes deterministic traces and complete reports") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ExperimentConfig c = small_config(a);
  c.loss = "smoothed_hinge:1";
  c.seeds = {1, 2};
  const auto ra = run_experiment(c);
  c.out = b.string();
  c.execution = "parallel";
  const auto rb = run_experiment(c);
  REQUIRE(ra.runs.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(slurp(ra.runs[s].csv_path) == slurp(rb.runs[s].csv_path));
    CHECK(ra.runs[s].csv_path.filename() == "trace_cocoa_seed" + std::to_string(s + 1) + ".csv");
  }
  CHECK_FALSE(slurp(ra.runs[0].csv_path) == slurp(ra.runs[1].csv_path));

  const auto rep = nlohmann::json::parse(slurp(ra.runs[0].json_path));
  for (const char* key : {"config", "seed", "method", "data", "final", "diverged", "ledger", "count_direction",
                          "reference", "theory", "synthetic_time_note"})
    CHECK(rep.contains(key));
  CHECK(rep["ledger"]["vectors_total"] == 2 * 15 * 4);
  CHECK(rep["final"]["primal_suboptimality"].get<double>() >= -1e-9);
  CHECK(rep["theory"]["n_tilde"] == 75);
  CHECK(rep["data"]["n"] == 300);

  // the CSV re-parses into the same records with the documented invariants
  std::ifstream in(ra.runs[0].csv_path);
  const auto recs = read_trace_csv(in);
  REQUIRE(recs == ra.runs[0].trace.records);
  for (std::size_t i = 1; i < recs.size(); ++i) {
    CHECK(recs[i].round > recs[i - 1].round);
    CHECK(recs[i].vectors > recs[i - 1].vectors);
    CHECK(recs[i].coordinate_updates > recs[i - 1].coordinate_updates);
    CHECK(recs[i].gap >= -1e-12);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("CoCoA needs fewer rounds than mini-batch CD to reach 1e-3") {
  const fs::path dir = scratch("rounds");
  ExperimentConfig c = small_config(dir);
  c.synthetic = SyntheticSpec{1000, 30, 0.5, 0.05, 4};
  c.lambda = 1e-3;
  c.H = 100;
  c.T = 300;
  const auto data = prepare_data(c);
  const auto ref = reference_solve(data.data, c.lambda, LossModel::hinge(), 1e-10);
  RunOptions opts;
  opts.p_star = ref.primal;
  opts.stop_suboptimality = 1e-3;
  const Trace co = run_method(c, data.data, 1, opts);
  c.method = Method::minibatch_cd;
  const Trace mb = run_method(c, data.data, 1, opts);
  const auto hit_co = first_hit(co, ref.primal, 1e-3);
  const auto hit_mb = first_hit(mb, ref.primal, 1e-3);
  REQUIRE(hit_co);
  CHECK((!hit_mb || hit_co->round < hit_mb->round));
  fs::remove_all(dir);
}

TEST_CASE("H sweep under a fixed update budget") {
  const fs::path dir = scratch("sweepH");
  ExperimentConfig c = small_config(dir);
  const std::uint64_t budget = 4 * 100 * 20;
  const auto r = sweep(c, SweepAxis::H, {"10", "20", "50", "100"}, budget);
  REQUIRE(r.rows.size() == 4);
  const Index Hs[] = {10, 20, 50, 100};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r.rows[i].total_vectors == 2 * budget / static_cast<std::uint64_t>(Hs[i]));
    CHECK(r.traces[i].ledger.coordinate_updates == budget);
  }
  CHECK(fs::exists(dir / "sweep_H.json"));
  CHECK(r.summary["target_metric"] == "primal suboptimality P(w) - P*");
  CHECK_THROWS_AS(sweep(c, SweepAxis::H, {}, budget), ConfigError);
  CHECK_THROWS_AS(sweep(c, SweepAxis::H, {"30"}, budget), ConfigError);
  CHECK_THROWS_AS(sweep(c, SweepAxis::H, {"abc"}), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("beta sweep for mini-batch CD: beta = 1 never diverges") {
  const fs::path dir = scratch("sweepB");
  ExperimentConfig c = small_config(dir);
  c.method = Method::minibatch_cd;
  c.synthetic = SyntheticSpec{400, 3, 1.0, 0.0, 2};
  c.H = 50;
  c.T = 30;
  c.lambda = 1e-3;
  const auto r = sweep(c, SweepAxis::beta, {"1", "200"});
  REQUIRE(r.rows.size() == 2);
  CHECK_FALSE(r.rows[0].diverged);
  CHECK(r.rows[1].diverged);
  CHECK_THROWS_AS(sweep(c, SweepAxis::beta, {"1", "201"}), ConfigError);
  CHECK(r.summary["rows"][0]["rounds_to"].contains("0.01"));
  fs::remove_all(dir);
}

TEST_CASE("method sweep runs every method on the same data") {
  const fs::path dir = scratch("sweepM");
  ExperimentConfig c = small_config(dir);
  c.H = 10;
  const auto r = sweep(c, SweepAxis::method, {"cocoa", "minibatch_cd", "minibatch_sgd", "local_sgd"});
  REQUIRE(r.traces.size() == 4);
  CHECK(r.traces[2].method == "minibatch_sgd");
  CHECK_THROWS_AS(sweep(c, SweepAxis::method, {"cocoa", "bfgs"}), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("reference cache: keyed by data, lambda and loss; reused and invalidated") {
  const fs::path dir = scratch("cache");
  const Dataset ds = gen_synthetic({80, 6, 0.5, 0.1, 5});
  const Dataset other = gen_synthetic({80, 6, 0.5, 0.1, 6});
  const ReferenceCache cache(dir);
  const auto hinge = LossModel::hinge();
  CHECK(ReferenceCache::key(ds, 0.01, hinge) != ReferenceCache::key(ds, 0.02, hinge));
  CHECK(ReferenceCache::key(ds, 0.01, hinge) != ReferenceCache::key(ds, 0.01, LossModel::logistic()));
  CHECK(ReferenceCache::key(ds, 0.01, hinge) != ReferenceCache::key(other, 0.01, hinge));
  CHECK(ReferenceCache::key(ds, 0.01, hinge) == ReferenceCache::key(gen_synthetic({80, 6, 0.5, 0.1, 5}), 0.01, hinge));

  CHECK_FALSE(cache.load(ds, 0.01, hinge, 1e-6));
  const auto sol = cache.get(ds, 0.01, hinge, 1e-6);
  CHECK(sol.gap <= 1e-6);
  const auto path = cache.path_for(ReferenceCache::key(ds, 0.01, hinge));
  CHECK(fs::exists(path));
  const auto hit = cache.load(ds, 0.01, hinge, 1e-6);
  REQUIRE(hit);
  CHECK(hit->primal == doctest::Approx(sol.primal).epsilon(1e-12));
  // a tighter tolerance than the cached gap forces a new solve
  CHECK_FALSE(cache.load(ds, 0.01, hinge, sol.gap / 10.0));
  // a corrupt file is treated as a miss
  std::ofstream(path) << "{ not json";
  CHECK_FALSE(cache.load(ds, 0.01, hinge, 1e-6));
  fs::remove_all(dir);
}

TEST_CASE("P* from the reference lower-bounds the primal everywhere") {
  const Dataset ds = gen_synthetic({100, 8, 0.6, 0.1, 7});
  std::mt19937_64 rng(1);
  for (const auto& m : {LossModel::hinge(), LossModel::logistic()}) {
    const auto ref = reference_solve(ds, 0.01, m, 1e-10);
    CHECK(ref.gap <= 1e-10);
    for (int t = 0; t < 100; ++t) {
      Vector w(8);
      for (Index j = 0; j < 8; ++j) w(j) = std::normal_distribution<double>(0, t < 50 ? 0.1 : 3.0)(rng);
      CHECK(oracle::primal(w, ds, 0.01, m) >= ref.primal - 1e-10);
      CHECK(oracle::primal(ref.w + 1e-3 * w, ds, 0.01, m) >= ref.primal - 1e-10);
    }
  }
}

TEST_CASE("file data: load, scale and report the factor") {
  const fs::path dir = scratch("file");
  const fs::path data = dir / "d.libsvm";
  std::ofstream(data) << "+1 1:3 2:4\n-1 2:1\n+1 1:2\n";
  ExperimentConfig c;
  c.data_path = data.string();
  const auto prepared = prepare_data(c);
  CHECK(prepared.scale == doctest::Approx(5.0));
  CHECK(prepared.data.max_norm() == doctest::Approx(1.0));
  c.scale = false;
  CHECK(prepare_data(c).scale == 1.0);
  c.data_path = (dir / "missing").string();
  CHECK_THROWS_AS(prepare_data(c), IoError);
  fs::remove_all(dir);
}

TEST_CASE("method names round trip") {
  for (auto m : {Method::cocoa, Method::minibatch_cd, Method::minibatch_sgd, Method::local_sgd})
    CHECK(parse_method(to_string(m)) == m);
  CHECK(parse_sweep_axis("beta") == SweepAxis::beta);
  CHECK_THROWS_AS(parse_sweep_axis("T"), ConfigError);
}
