#pragma once

#include "rocbench/bayesian.hpp"
#include "rocbench/cases.hpp"
#include "rocbench/forest.hpp"
#include "rocbench/frequentist.hpp"
#include "rocbench/replacement.hpp"
#include "rocbench/roc.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rocbench {

struct RunConfig {
  std::uint64_t seed = 0;
  SplitRatio classification_performance{7, 3};
  SplitRatio train_validation{4, 3};
  ForestParams forest;  // forest.seed is derived from `seed`
  int bootstrap_draws = 100;
  int posterior_draws = 10000;
  double level = 0.95;
  double prior_gamma = kDefaultPriorGamma;
  LossKind loss_kind = LossKind::BaselineIndicator;
  CovarianceSource covariance = CovarianceSource::Bootstrap;
  int grid_size = kDefaultGridSize;
  std::size_t min_cases = 300;
  std::vector<double> path_fractions;  // empty: 0, 0.05, ..., 1
  std::vector<double> lambdas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  int randomized_replicates = 20;
  int sweep_points = 100;

  void validate() const;
  std::vector<double> fractions() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Fields absent from `doc` keep their defaults; unknown fields are rejected.
RunConfig config_from_json(const nlohmann::json& doc, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Seeds of the named pipeline stages.
std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage);
std::uint64_t maker_seed(std::uint64_t seed, std::string_view stage, const std::string& maker_id);

struct MakerBenchmark {
  std::string maker_id;
  ConfusionCounts counts;
  std::optional<FrequentistVerdict> frequentist;
  std::map<LossKind, BayesVerdict> bayes;  // every named kind, from one set of draws
  std::string excluded;                    // reason when the maker could not be benchmarked
};

/// Frequentist and Bayesian analyses of every maker in `data` against `roc`.
std::vector<MakerBenchmark> benchmark_makers(const CohortDataset& data, const RocCurve& roc,
                                             const RunConfig& config);

struct PipelineResult {
  std::size_t n_input = 0;
  std::size_t n_filtered = 0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  std::size_t n_performance = 0;
  Forest forest;
  RocCurve validation_roc;
  RocCurve performance_roc;
  std::vector<MakerBenchmark> makers;
  CombinedOutcome human;
  CombinedOutcome frequentist;
  CombinedOutcome bayes;
  std::size_t replaced_frequentist = 0;
  std::size_t replaced_bayes = 0;
  std::map<LossKind, std::vector<PathPoint>> paths;
  nlohmann::json summary;
};

/// Filter, split, train, benchmark, replace and evaluate. Writes every artifact
/// into `out_dir` unless it is empty.
PipelineResult run_pipeline(const RunConfig& config, const std::vector<CaseRecord>& cases,
                            const std::string& out_dir);

/// Verdict files written by the benchmark stages, read back as replacement verdicts.
std::vector<ReplacementVerdict> read_verdicts_csv(const std::string& path);

}  // namespace rocbench
