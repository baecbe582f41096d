#pragma once

#include "rocbench/cases.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rocbench {

struct DominatingSegment;
struct BayesVerdict;
struct FrequentistVerdict;

struct ReplacementVerdict {
  std::string maker_id;
  bool replace = false;
  std::optional<double> threshold;
  std::map<std::string, double> diagnostics;  // q_max, min_loss, case label code, ...
};

ReplacementVerdict to_replacement(const BayesVerdict& v);
ReplacementVerdict to_replacement(const FrequentistVerdict& v);

using Scorer = std::function<double(const Eigen::VectorXd&)>;

/// One machine score per case; NaN for cases without features.
std::vector<double> score_cases(const CohortDataset& data, const Scorer& scorer);

struct CombinedOutcome {
  RatePair pair;
  ConfusionCounts counts;
};

/// Retained makers keep their decisions; replaced makers' cases get 1(score > threshold).
CombinedOutcome combine_decisions(const CohortDataset& data, std::span<const double> scores,
                                  std::span<const ReplacementVerdict> verdicts);

struct RankedMaker {
  std::string maker_id;
  double loss = 0.0;
  double threshold = 0.0;
};

struct PathPoint {
  double fraction = 0.0;
  RatePair pair;
  std::size_t replaced = 0;
};

/// round-half-up(f * n) for the path's replacement counts.
std::size_t replaced_count(double fraction, std::size_t n);

/// For each fraction, replaces the lowest-loss makers (ties by maker_id) at their
/// thresholds. Makers absent from the ranking keep their own decisions.
std::vector<PathPoint> replacement_path(const CohortDataset& data, std::span<const double> scores,
                                        std::vector<RankedMaker> ranking,
                                        std::span<const double> fractions);

enum class ScheduleScope { LessCapableOnly, AllMakers };
enum class RankDirection { LessCapableMore, LessCapableLess };

struct AcceptanceSchedule {
  enum class Kind { Constant, LinearByRank };
  Kind kind = Kind::Constant;
  double lambda = 1.0;
  RankDirection direction = RankDirection::LessCapableMore;
  ScheduleScope scope = ScheduleScope::LessCapableOnly;

  static AcceptanceSchedule constant(double lambda, ScheduleScope scope);
  static AcceptanceSchedule linear(RankDirection direction, ScheduleScope scope);
};

/// Per-maker acceptance probabilities. `capability_loss` ranks makers for
/// linear schedules: the largest loss is the most capable maker, rank 1.
/// Makers without a threshold always get 0.
std::map<std::string, double> acceptance_rates(std::span<const ReplacementVerdict> verdicts,
                                               const AcceptanceSchedule& schedule,
                                               const std::map<std::string, double>& capability_loss);

/// Each case independently takes the machine decision when U[0,1) < its maker's rate.
CombinedOutcome randomized_accept(const CohortDataset& data, std::span<const double> scores,
                                  std::span<const ReplacementVerdict> verdicts,
                                  const std::map<std::string, double>& rates, std::uint64_t seed);

CombinedOutcome randomized_accept(const CohortDataset& data, std::span<const double> scores,
                                  std::span<const ReplacementVerdict> verdicts,
                                  const AcceptanceSchedule& schedule,
                                  const std::map<std::string, double>& capability_loss,
                                  std::uint64_t seed);

/// Pooled pairs as every replaced maker moves through N thresholds evenly spaced
/// over their dominating range, all makers at the same step.
std::vector<CombinedOutcome> threshold_sweep(const CohortDataset& data, std::span<const double> scores,
                                             std::span<const FrequentistVerdict> verdicts, int n);

/// `fraction,fpr,tpr`
void write_path_csv(std::ostream& out, std::span<const PathPoint> path);
/// `lambda,fpr,tpr,seed`
struct RandomizedRow {
  double lambda = 0.0;
  RatePair pair;
  std::uint64_t seed = 0;
};
void write_randomized_csv(std::ostream& out, std::span<const RandomizedRow> rows);

}  // namespace rocbench
