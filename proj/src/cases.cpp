#include "rocbench/cases.hpp"

#include "rocbench/random.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace rocbench {

void ConfusionCounts::add(int y, int y_hat) {
  if (y == 1) {
    (y_hat == 1 ? n11 : n10) += 1;
  } else {
    (y_hat == 1 ? n01 : n00) += 1;
  }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  n11 += o.n11;
  n01 += o.n01;
  n10 += o.n10;
  n00 += o.n00;
  return *this;
}

namespace {

void check_binary(const CaseRecord& c) {
  if ((c.y != 0 && c.y != 1) || (c.y_hat != 0 && c.y_hat != 1)) {
    throw std::invalid_argument("labels must be 0/1 (maker " + c.maker_id + ")");
  }
}

int cell_of(const CaseRecord& c) { return (1 - c.y) + 2 * (1 - c.y_hat); }

}  // namespace

CohortDataset::CohortDataset(std::vector<CaseRecord> cases) : cases_(std::move(cases)) {
  for (std::size_t i = 0; i < cases_.size(); ++i) {
    const auto& c = cases_[i];
    check_binary(c);
    if (i == 0) {
      feature_dim_ = c.features.size();
    } else if (c.features.size() != feature_dim_) {
      throw std::invalid_argument("feature dimension mismatch at case " + std::to_string(i));
    }
    auto [it, inserted] = index_.try_emplace(c.maker_id, makers_.size());
    if (inserted) makers_.push_back({c.maker_id, {}});
    makers_[it->second].indices.push_back(i);
  }
}

double CohortDataset::base_rate_hat() const {
  if (cases_.empty()) return 0.0;
  std::size_t pos = 0;
  for (const auto& c : cases_) pos += static_cast<std::size_t>(c.y);
  return static_cast<double>(pos) / static_cast<double>(cases_.size());
}

const MakerGroup* CohortDataset::find(const std::string& maker_id) const {
  auto it = index_.find(maker_id);
  return it == index_.end() ? nullptr : &makers_[it->second];
}

std::vector<CaseRecord> CohortDataset::maker_cases(const MakerGroup& group) const {
  std::vector<CaseRecord> out;
  out.reserve(group.indices.size());
  for (auto i : group.indices) out.push_back(cases_[i]);
  return out;
}

Eigen::MatrixXd CohortDataset::feature_matrix() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(cases_.size()), feature_dim_);
  for (std::size_t i = 0; i < cases_.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = cases_[i].features.transpose();
  }
  return x;
}

std::vector<int> CohortDataset::labels() const {
  std::vector<int> y(cases_.size());
  std::transform(cases_.begin(), cases_.end(), y.begin(), [](const auto& c) { return c.y; });
  return y;
}

ConfusionCounts confusion_counts(std::span<const CaseRecord> cases) {
  if (cases.empty()) throw std::invalid_argument("empty case set");
  ConfusionCounts counts;
  for (const auto& c : cases) {
    check_binary(c);
    counts.add(c.y, c.y_hat);
  }
  return counts;
}

ConfusionCounts confusion_counts(const CohortDataset& data, const MakerGroup& group) {
  if (group.indices.empty()) throw std::invalid_argument("empty case set");
  ConfusionCounts counts;
  for (auto i : group.indices) counts.add(data.cases()[i].y, data.cases()[i].y_hat);
  return counts;
}

RatePair rate_pair(const ConfusionCounts& counts) {
  if (counts.positives() == 0) throw DegenerateError("degenerate: no positives");
  if (counts.negatives() == 0) throw DegenerateError("degenerate: no negatives");
  return {static_cast<double>(counts.n01) / static_cast<double>(counts.negatives()),
          static_cast<double>(counts.n11) / static_cast<double>(counts.positives())};
}

SplitResult stratified_split(std::span<const CaseRecord> cases, SplitRatio ratio,
                             std::uint64_t seed) {
  if (ratio.first < 0 || ratio.second < 0 || ratio.first + ratio.second == 0) {
    throw std::invalid_argument("split ratio components must be nonnegative and not both zero");
  }
  // Strata in order of first appearance: (maker, cell).
  std::unordered_map<std::string, std::size_t> maker_slot;
  std::vector<std::array<std::vector<std::size_t>, 4>> strata;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    check_binary(cases[i]);
    auto [it, inserted] = maker_slot.try_emplace(cases[i].maker_id, strata.size());
    if (inserted) strata.emplace_back();
    strata[it->second][cell_of(cases[i])].push_back(i);
  }

  Rng rng(substream_seed(seed, "split"));
  std::vector<char> to_second(cases.size(), 0);
  const auto total = static_cast<std::int64_t>(ratio.first) + ratio.second;
  for (auto& maker : strata) {
    for (auto& stratum : maker) {
      std::shuffle(stratum.begin(), stratum.end(), rng);
      const auto n = static_cast<std::int64_t>(stratum.size());
      const auto n_second = n * ratio.second / total;
      for (std::int64_t k = n - n_second; k < n; ++k) to_second[stratum[k]] = 1;
    }
  }

  SplitResult out;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    (to_second[i] ? out.second : out.first).push_back(cases[i]);
  }
  return out;
}

std::vector<CaseRecord> filter_min_cases(std::span<const CaseRecord> cases,
                                         std::size_t min_cases) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& c : cases) ++counts[c.maker_id];
  std::vector<CaseRecord> out;
  for (const auto& c : cases) {
    if (counts[c.maker_id] >= min_cases) out.push_back(c);
  }
  return out;
}

}  // namespace rocbench
