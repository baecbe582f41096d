#pragma once

#include <Eigen/Core>

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rocbench {

struct ForestParams {
  int n_estimators = 100;
  int max_features = 50;  // capped at the feature dimension when training
  int min_samples_split = 50;
  std::uint64_t seed = 0;
  /// Test hook: when false every tree sees the full training set.
  bool bootstrap = true;
};

/// Internal node when `feature >= 0`, leaf otherwise.
struct TreeNode {
  int feature = -1;
  double split = 0.0;
  int left = -1;
  int right = -1;
  double prob = 0.0;

  bool is_leaf() const { return feature < 0; }
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  friend bool operator==(const DecisionTree& a, const DecisionTree& b);

 private:
  std::vector<TreeNode> nodes_;  // root first
};

bool operator==(const TreeNode& a, const TreeNode& b);

class Forest {
 public:
  Forest() = default;
  Forest(ForestParams params, Eigen::Index n_features, std::vector<DecisionTree> trees);

  const ForestParams& params() const { return params_; }
  Eigen::Index n_features() const { return n_features_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  /// Mean leaf probability over the trees.
  double predict_propensity(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// One propensity per row of `x`.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

  nlohmann::json to_json() const;
  static Forest from_json(const nlohmann::json& doc);

  friend bool operator==(const Forest& a, const Forest& b) {
    return a.n_features_ == b.n_features_ && a.trees_ == b.trees_;
  }

 private:
  ForestParams params_;
  Eigen::Index n_features_ = 0;
  std::vector<DecisionTree> trees_;
};

/// Bagged Gini trees over the rows of `x` (n x d) with 0/1 `y`.
Forest train_forest(const Eigen::MatrixXd& x, std::span<const int> y, const ForestParams& params);

/// A single unpruned tree grown on the rows listed in `rows` (duplicates allowed).
DecisionTree grow_tree(const Eigen::MatrixXd& x, std::span<const int> y,
                       std::vector<std::size_t> rows, int max_features,
                       int min_samples_split, std::uint64_t seed);

void save_forest(const std::string& path, const Forest& forest);
Forest load_forest(const std::string& path);

}  // namespace rocbench
