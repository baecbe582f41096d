#include "rocbench/pipeline.hpp"
#include "rocbench/synthetic.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rocbench;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.seed = 17;
  c.forest = {20, 1, 40, 0, true};
  c.bootstrap_draws = 40;
  c.posterior_draws = 1000;
  c.grid_size = 64;
  c.min_cases = 100;
  c.path_fractions = {0.0, 0.5, 1.0};
  c.lambdas = {0.0, 1.0};
  c.randomized_replicates = 2;
  c.sweep_points = 3;
  return c;
}

std::vector<CaseRecord> spread_cutoffs() {
  HeterogeneousCutoffSpec s;
  s.cutoffs = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  s.cases_per_maker = 800;
  s.seed = 5;
  return gen_heterogeneous_cutoffs(s).data.cases();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("rocbench_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("run config JSON") {
  const auto c = small_config();
  CHECK(to_json(config_from_json(to_json(c))) == to_json(c));
  CHECK(config_from_json(nlohmann::json::object()).posterior_draws == 10000);
  const auto partial = config_from_json({{"level", 0.9}, {"forest", {{"n_estimators", 7}}}});
  CHECK(partial.level == 0.9);
  CHECK(partial.forest.n_estimators == 7);
  CHECK(partial.forest.min_samples_split == 50);
  CHECK_THROWS(config_from_json({{"levl", 0.9}}));
  CHECK_THROWS(config_from_json({{"loss_kind", "quadratic"}}));
  CHECK_THROWS(config_from_json(nlohmann::json::array()));

  RunConfig d;
  CHECK(d.fractions().size() == 21);
  CHECK(d.fractions()[1] == doctest::Approx(0.05));
  d.validate();
  d.level = 1.0;
  CHECK_THROWS(d.validate());
  d = {};
  d.sweep_points = 1;
  CHECK_THROWS(d.validate());
  d = {};
  d.lambdas = {1.2};
  CHECK_THROWS(d.validate());
  d = {};
  d.loss_kind = LossKind::Pluggable;
  CHECK_THROWS(d.validate());
}

TEST_CASE("stage seeds") {
  CHECK(stage_seed(1, "forest") == stage_seed(1, "forest"));
  CHECK(stage_seed(1, "forest") != stage_seed(2, "forest"));
  CHECK(stage_seed(1, "forest") != stage_seed(1, "split-performance"));
  CHECK(maker_seed(1, "posterior", "m01") != maker_seed(1, "posterior", "m02"));
  CHECK(maker_seed(1, "posterior", "m01") != maker_seed(1, "bootstrap", "m01"));
}

TEST_CASE("pipeline on makers with spread cutoffs") {
  const auto cases = spread_cutoffs();
  const auto dir = scratch("a");
  const auto res = run_pipeline(small_config(), cases, dir.string());

  CHECK(res.n_input == cases.size());
  CHECK(res.n_train + res.n_validation + res.n_performance == res.n_filtered);
  CHECK(res.makers.size() == 9);
  CHECK(res.summary["human_below_performance_roc"].get<bool>());
  CHECK(res.summary["gap_to_performance_roc"]["human"].get<double>() < 0.0);
  CHECK(res.summary["auc"]["performance"].get<double>() > 0.75);
  for (const auto& m : res.makers) {
    CHECK(m.excluded.empty());
    CHECK(m.frequentist.has_value());
    CHECK(m.bayes.size() == named_loss_kinds().size());
  }
  for (const auto& [kind, path] : res.paths) {
    REQUIRE(path.size() == 3);
    CHECK(path.front().pair == res.human.pair);
    CHECK(path.back().replaced == 9);
  }

  for (const char* f : {"config.json", "split_manifest.json", "train.csv", "validation.csv", "performance.csv",
                        "forest.json", "roc_validation.csv", "roc_performance.csv", "verdicts_frequentist.csv",
                        "verdicts_bayes.csv", "combined.csv", "randomized_less_capable.csv", "randomized_all.csv",
                        "randomized_linear.csv", "sweep_frequentist.csv", "summary.json"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }

  const auto bayes = read_verdicts_csv((dir / "verdicts_bayes.csv").string());
  REQUIRE(bayes.size() == 9);
  for (const auto& v : bayes) {
    const auto it = std::find_if(res.makers.begin(), res.makers.end(),
                                 [&](const MakerBenchmark& m) { return m.maker_id == v.maker_id; });
    REQUIRE(it != res.makers.end());
    const auto& b = it->bayes.at(LossKind::BaselineIndicator);
    CHECK(v.replace == b.replace);
    CHECK(v.diagnostics.at("q_max") == doctest::Approx(b.dominance.q_max));
  }
  const auto freq = read_verdicts_csv((dir / "verdicts_frequentist.csv").string());
  CHECK(freq.size() == 9);

  SUBCASE("a rerun reproduces every artifact byte for byte") {
    const auto again = scratch("b");
    run_pipeline(small_config(), cases, again.string());
    for (const auto& e : fs::directory_iterator(dir)) {
      CHECK_MESSAGE(slurp(e.path()) == slurp(again / e.path().filename()), e.path().filename().string());
    }
    fs::remove_all(again);
  }
  fs::remove_all(dir);
}

TEST_CASE("pipeline input errors") {
  const auto cases = spread_cutoffs();
  auto c = small_config();
  c.min_cases = 100000;
  CHECK_THROWS_AS(run_pipeline(c, cases, ""), std::invalid_argument);
  std::vector<CaseRecord> bare(cases.begin(), cases.begin() + 400);
  for (auto& r : bare) r.features.resize(0);
  CHECK_THROWS_AS(run_pipeline(small_config(), bare, ""), std::invalid_argument);
}
