#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rocbench {

/// A (FPR, TPR) point.
struct RatePair {
  double alpha = 0.0;  // false positive rate
  double beta = 0.0;   // true positive rate

  friend bool operator==(const RatePair&, const RatePair&) = default;
};

/// Weak dominance: `m` has no larger FPR and no smaller TPR than `h`.
inline bool dominates(const RatePair& m, const RatePair& h) {
  return m.alpha <= h.alpha && m.beta >= h.beta;
}

/// The four multinomial cells of a decision maker's record, in the cell order
/// (y=1,yhat=1), (y=0,yhat=1), (y=1,yhat=0), (y=0,yhat=0).
struct ConfusionCounts {
  std::int64_t n11 = 0;
  std::int64_t n01 = 0;
  std::int64_t n10 = 0;
  std::int64_t n00 = 0;

  std::int64_t total() const { return n11 + n01 + n10 + n00; }
  std::int64_t positives() const { return n11 + n10; }
  std::int64_t negatives() const { return n01 + n00; }

  void add(int y, int y_hat);
  Eigen::Vector4d cells() const {
    return {double(n11), double(n01), double(n10), double(n00)};
  }

  ConfusionCounts& operator+=(const ConfusionCounts& o);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct CaseRecord {
  std::string maker_id;
  int y = 0;
  int y_hat = 0;
  Eigen::VectorXd features;  // empty when the dataset carries no features

  bool has_features() const { return features.size() > 0; }
};

/// Raised when a rate is requested for a record set missing one of the classes.
class DegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct MakerGroup {
  std::string maker_id;
  std::vector<std::size_t> indices;  // into CohortDataset::cases()
};

/// Cases grouped by decision maker. Makers are kept in order of first
/// appearance; maker ids carry no ordering semantics of their own.
class CohortDataset {
 public:
  CohortDataset() = default;
  explicit CohortDataset(std::vector<CaseRecord> cases);

  const std::vector<CaseRecord>& cases() const { return cases_; }
  const std::vector<MakerGroup>& makers() const { return makers_; }
  std::size_t size() const { return cases_.size(); }
  /// Feature dimension, or 0 when the cases carry none.
  Eigen::Index feature_dim() const { return feature_dim_; }
  double base_rate_hat() const;

  const MakerGroup* find(const std::string& maker_id) const;
  std::vector<CaseRecord> maker_cases(const MakerGroup& group) const;

  /// Feature rows of all cases, n x d.
  Eigen::MatrixXd feature_matrix() const;
  std::vector<int> labels() const;

 private:
  std::vector<CaseRecord> cases_;
  std::vector<MakerGroup> makers_;
  std::unordered_map<std::string, std::size_t> index_;
  Eigen::Index feature_dim_ = 0;
};

ConfusionCounts confusion_counts(std::span<const CaseRecord> cases);
ConfusionCounts confusion_counts(const CohortDataset& data, const MakerGroup& group);

RatePair rate_pair(const ConfusionCounts& counts);

struct SplitRatio {
  int first = 1;
  int second = 1;
};

using SplitResult = std::pair<std::vector<CaseRecord>, std::vector<CaseRecord>>;

/// Randomly partitions every (maker, confusion cell) stratum in the given
/// ratio. The second part of each stratum receives floor(n*second/(first+second))
/// records and the first part the remainder. Both outputs keep input order.
SplitResult stratified_split(std::span<const CaseRecord> cases, SplitRatio ratio,
                             std::uint64_t seed);

/// Keeps only makers with at least `min_cases` records.
std::vector<CaseRecord> filter_min_cases(std::span<const CaseRecord> cases,
                                         std::size_t min_cases);

}  // namespace rocbench
