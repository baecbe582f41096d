#include "rocbench/replacement.hpp"

#include "rocbench/bayesian.hpp"
#include "rocbench/csv.hpp"
#include "rocbench/frequentist.hpp"
#include "rocbench/random.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

namespace rocbench {

namespace {

using VerdictIndex = std::map<std::string, const ReplacementVerdict*>;

VerdictIndex index_verdicts(std::span<const ReplacementVerdict> verdicts) {
  VerdictIndex idx;
  for (const auto& v : verdicts) {
    if (v.replace && !v.threshold) {
      throw std::invalid_argument("verdict for " + v.maker_id + " replaces without a threshold");
    }
    if (!idx.emplace(v.maker_id, &v).second) {
      throw std::invalid_argument("duplicate verdict for maker " + v.maker_id);
    }
  }
  return idx;
}

const ReplacementVerdict& verdict_for(const VerdictIndex& idx, const std::string& maker_id) {
  const auto it = idx.find(maker_id);
  if (it == idx.end()) throw std::invalid_argument("no verdict for maker " + maker_id);
  return *it->second;
}

void check_scores(const CohortDataset& data, std::span<const double> scores) {
  if (scores.size() != data.size()) throw std::invalid_argument("one score per case required");
}

int machine_decision(double score, double threshold, const std::string& maker_id) {
  if (std::isnan(score)) {
    throw std::invalid_argument("case of replaced maker " + maker_id + " carries no features");
  }
  return score > threshold ? 1 : 0;
}

CombinedOutcome finish(const ConfusionCounts& counts) { return {rate_pair(counts), counts}; }

}  // namespace

ReplacementVerdict to_replacement(const BayesVerdict& v) {
  ReplacementVerdict r;
  r.maker_id = v.maker_id;
  r.replace = v.replace;
  r.threshold = v.threshold;
  r.diagnostics["q_max"] = v.dominance.q_max;
  r.diagnostics["min_loss"] = v.minimum.value;
  r.diagnostics["above_curve"] = v.above_curve ? 1.0 : 0.0;
  return r;
}

ReplacementVerdict to_replacement(const FrequentistVerdict& v) {
  ReplacementVerdict r;
  r.maker_id = v.maker_id;
  r.replace = v.replace();
  r.threshold = v.threshold();
  r.diagnostics["case_label"] = static_cast<double>(static_cast<int>(v.label) + 1);
  return r;
}

std::vector<double> score_cases(const CohortDataset& data, const Scorer& scorer) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& c : data.cases()) {
    out.push_back(c.has_features() ? scorer(c.features) : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

CombinedOutcome combine_decisions(const CohortDataset& data, std::span<const double> scores,
                                  std::span<const ReplacementVerdict> verdicts) {
  check_scores(data, scores);
  const auto idx = index_verdicts(verdicts);
  ConfusionCounts counts;
  for (const auto& g : data.makers()) {
    const auto& v = verdict_for(idx, g.maker_id);
    for (auto i : g.indices) {
      const auto& c = data.cases()[i];
      counts.add(c.y, v.replace ? machine_decision(scores[i], *v.threshold, g.maker_id) : c.y_hat);
    }
  }
  return finish(counts);
}

std::size_t replaced_count(double fraction, std::size_t n) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must lie in [0,1]");
  return std::min(n, static_cast<std::size_t>(std::floor(fraction * double(n) + 0.5)));
}

std::vector<PathPoint> replacement_path(const CohortDataset& data, std::span<const double> scores,
                                        std::vector<RankedMaker> ranking,
                                        std::span<const double> fractions) {
  check_scores(data, scores);
  std::sort(ranking.begin(), ranking.end(), [](const RankedMaker& a, const RankedMaker& b) {
    return a.loss != b.loss ? a.loss < b.loss : a.maker_id < b.maker_id;
  });
  std::set<std::string> ranked;
  for (const auto& r : ranking) {
    if (!ranked.insert(r.maker_id).second) throw std::invalid_argument("maker ranked twice: " + r.maker_id);
  }
  std::vector<PathPoint> path;
  for (double f : fractions) {
    const std::size_t k = replaced_count(f, ranking.size());
    std::vector<ReplacementVerdict> verdicts;
    verdicts.reserve(data.makers().size());
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      verdicts.push_back({ranking[i].maker_id, i < k, ranking[i].threshold, {}});
    }
    for (const auto& g : data.makers()) {
      if (!ranked.contains(g.maker_id)) verdicts.push_back({g.maker_id, false, std::nullopt, {}});
    }
    path.push_back({f, combine_decisions(data, scores, verdicts).pair, k});
  }
  return path;
}

AcceptanceSchedule AcceptanceSchedule::constant(double lambda, ScheduleScope scope) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("acceptance rate must lie in [0,1]");
  AcceptanceSchedule s;
  s.kind = Kind::Constant;
  s.lambda = lambda;
  s.scope = scope;
  return s;
}

AcceptanceSchedule AcceptanceSchedule::linear(RankDirection direction, ScheduleScope scope) {
  AcceptanceSchedule s;
  s.kind = Kind::LinearByRank;
  s.direction = direction;
  s.scope = scope;
  return s;
}

std::map<std::string, double> acceptance_rates(std::span<const ReplacementVerdict> verdicts,
                                               const AcceptanceSchedule& schedule,
                                               const std::map<std::string, double>& capability_loss) {
  std::map<std::string, double> rates;
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& v : verdicts) {
    const bool in_scope = v.threshold && (schedule.scope == ScheduleScope::AllMakers || v.replace);
    rates[v.maker_id] = 0.0;
    if (!in_scope) continue;
    if (schedule.kind == AcceptanceSchedule::Kind::Constant) {
      rates[v.maker_id] = schedule.lambda;
    } else {
      const auto it = capability_loss.find(v.maker_id);
      if (it == capability_loss.end()) throw std::invalid_argument("no capability loss for " + v.maker_id);
      ranked.emplace_back(it->second, v.maker_id);
    }
  }
  if (!ranked.empty()) {
    // Rank 1 is the most capable maker: the largest loss of replacing them.
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const double n = double(ranked.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const double r = double(i + 1);
      double lambda = 1.0;
      if (ranked.size() > 1) {
        lambda = schedule.direction == RankDirection::LessCapableMore ? (r - 1.0) / (n - 1.0)
                                                                      : (n - r) / (n - 1.0);
      }
      rates[ranked[i].second] = lambda;
    }
  }
  return rates;
}

CombinedOutcome randomized_accept(const CohortDataset& data, std::span<const double> scores,
                                  std::span<const ReplacementVerdict> verdicts,
                                  const std::map<std::string, double>& rates, std::uint64_t seed) {
  check_scores(data, scores);
  const auto idx = index_verdicts(verdicts);
  Rng rng(seed);
  ConfusionCounts counts;
  for (const auto& g : data.makers()) {
    const auto& v = verdict_for(idx, g.maker_id);
    const auto it = rates.find(g.maker_id);
    const double lambda = it == rates.end() ? 0.0 : it->second;
    if (lambda > 0.0 && !v.threshold) {
      throw std::invalid_argument("maker " + g.maker_id + " has an acceptance rate but no threshold");
    }
    for (auto i : g.indices) {
      const auto& c = data.cases()[i];
      const bool machine = uniform01(rng) < lambda;
      counts.add(c.y, machine ? machine_decision(scores[i], *v.threshold, g.maker_id) : c.y_hat);
    }
  }
  return finish(counts);
}

CombinedOutcome randomized_accept(const CohortDataset& data, std::span<const double> scores,
                                  std::span<const ReplacementVerdict> verdicts,
                                  const AcceptanceSchedule& schedule,
                                  const std::map<std::string, double>& capability_loss,
                                  std::uint64_t seed) {
  return randomized_accept(data, scores, verdicts, acceptance_rates(verdicts, schedule, capability_loss),
                           seed);
}

std::vector<CombinedOutcome> threshold_sweep(const CohortDataset& data, std::span<const double> scores,
                                             std::span<const FrequentistVerdict> verdicts, int n) {
  if (n < 2) throw std::invalid_argument("threshold_sweep: N must be at least 2");
  std::vector<CombinedOutcome> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) {
    std::vector<ReplacementVerdict> step;
    step.reserve(verdicts.size());
    for (const auto& v : verdicts) {
      ReplacementVerdict r{v.maker_id, v.replace(), std::nullopt, {}};
      if (r.replace) {
        const auto& seg = *v.segment;
        r.threshold = l == n - 1 ? seg.c_upper : seg.c_lower + (seg.c_upper - seg.c_lower) / double(n - 1) * l;
      }
      step.push_back(std::move(r));
    }
    out.push_back(combine_decisions(data, scores, step));
  }
  return out;
}

void write_path_csv(std::ostream& out, std::span<const PathPoint> path) {
  out << "fraction,fpr,tpr\n";
  for (const auto& p : path) {
    out << format_number(p.fraction) << ',' << format_number(p.pair.alpha) << ','
        << format_number(p.pair.beta) << '\n';
  }
}

void write_randomized_csv(std::ostream& out, std::span<const RandomizedRow> rows) {
  out << "lambda,fpr,tpr,seed\n";
  for (const auto& r : rows) {
    out << format_number(r.lambda) << ',' << format_number(r.pair.alpha) << ','
        << format_number(r.pair.beta) << ',' << r.seed << '\n';
  }
}

}  // namespace rocbench
