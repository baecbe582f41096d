#include "rocbench/forest.hpp"

#include "rocbench/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace rocbench {

using nlohmann::json;

bool operator==(const TreeNode& a, const TreeNode& b) {
  if (a.is_leaf() != b.is_leaf()) return false;
  if (a.is_leaf()) return a.prob == b.prob;
  return a.feature == b.feature && a.split == b.split && a.left == b.left && a.right == b.right;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) { return a.nodes_ == b.nodes_; }

double DecisionTree::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  int i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = x[n.feature] <= n.split ? n.left : n.right;
  }
  return nodes_[i].prob;
}

namespace {

struct SplitChoice {
  int feature = -1;
  double value = 0.0;
  double gain = 0.0;
};

// n * Gini impurity of a node with `pos` positives among `n`.
double weighted_gini(double pos, double n) {
  if (n <= 0.0) return 0.0;
  const double p = pos / n;
  return n * 2.0 * p * (1.0 - p);
}

double midpoint(double a, double b) {
  const double m = a + (b - a) * 0.5;
  return m < b ? m : a;
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const int> y, int max_features,
              int min_samples_split, std::uint64_t seed)
      : x_(x), y_(y), max_features_(max_features), min_split_(min_samples_split), rng_(seed) {
    features_.resize(static_cast<std::size_t>(x.cols()));
    std::iota(features_.begin(), features_.end(), 0);
  }

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    grow(std::move(rows));
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t> rows) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::size_t pos = 0;
    for (auto r : rows) pos += static_cast<std::size_t>(y_[r]);
    const double n = static_cast<double>(rows.size());
    nodes_[id].prob = n > 0 ? static_cast<double>(pos) / n : 0.0;
    if (pos == 0 || pos == rows.size() || rows.size() < static_cast<std::size_t>(min_split_)) {
      return id;
    }
    const SplitChoice best = best_split(rows, static_cast<double>(pos));
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (x_(static_cast<Eigen::Index>(r), best.feature) <= best.value ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    nodes_[id].feature = best.feature;
    nodes_[id].split = best.value;
    const int l = grow(std::move(left));
    nodes_[id].left = l;
    const int r = grow(std::move(right));
    nodes_[id].right = r;
    return id;
  }

  std::vector<int> sample_features() {
    const int d = static_cast<int>(features_.size());
    const int m = std::min(max_features_, d);
    for (int i = 0; i < m; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(features_[static_cast<std::size_t>(i)], features_[static_cast<std::size_t>(pick(rng_))]);
    }
    std::vector<int> chosen(features_.begin(), features_.begin() + m);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  SplitChoice best_split(const std::vector<std::size_t>& rows, double pos) {
    const double n = static_cast<double>(rows.size());
    const double parent = weighted_gini(pos, n);
    SplitChoice best;
    std::vector<std::pair<double, int>> column(rows.size());
    for (int f : sample_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        column[i] = {x_(static_cast<Eigen::Index>(rows[i]), f), y_[rows[i]]};
      }
      std::sort(column.begin(), column.end());
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_pos += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double impurity = weighted_gini(left_pos, nl) + weighted_gini(pos - left_pos, n - nl);
        const double gain = (parent - impurity) / n;
        if (gain > best.gain + 1e-12) {
          best = {f, midpoint(column[i].first, column[i + 1].first), gain};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  std::span<const int> y_;
  int max_features_;
  int min_split_;
  Rng rng_;
  std::vector<int> features_;
  std::vector<TreeNode> nodes_;
};

json node_to_json(const std::vector<TreeNode>& nodes, int i) {
  const auto& n = nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return json{{"leaf", n.prob}};
  return json{{"feature", n.feature},
              {"split", n.split},
              {"prob", n.prob},
              {"left", node_to_json(nodes, n.left)},
              {"right", node_to_json(nodes, n.right)}};
}

int node_from_json(const json& j, std::vector<TreeNode>& nodes, Eigen::Index dim) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (j.contains("leaf")) {
    const double p = j.at("leaf").get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("forest: leaf probability outside [0,1]");
    nodes[static_cast<std::size_t>(id)].prob = p;
    return id;
  }
  const int f = j.at("feature").get<int>();
  if (f < 0 || f >= dim) throw std::invalid_argument("forest: feature index out of range");
  TreeNode node;
  node.feature = f;
  node.split = j.at("split").get<double>();
  node.prob = j.value("prob", 0.0);
  node.left = node_from_json(j.at("left"), nodes, dim);
  node.right = node_from_json(j.at("right"), nodes, dim);
  nodes[static_cast<std::size_t>(id)] = node;
  return id;
}

}  // namespace

Forest::Forest(ForestParams params, Eigen::Index n_features, std::vector<DecisionTree> trees)
    : params_(params), n_features_(n_features), trees_(std::move(trees)) {}

double Forest::predict_propensity(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != n_features_) throw std::invalid_argument("forest: feature dimension mismatch");
  if (trees_.empty()) throw std::logic_error("forest: no trees");
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return std::clamp(sum / static_cast<double>(trees_.size()), 0.0, 1.0);
}

Eigen::VectorXd Forest::predict(const Eigen::MatrixXd& x) const {
  if (x.cols() != n_features_) throw std::invalid_argument("forest: feature dimension mismatch");
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict_propensity(x.row(i).transpose());
  return out;
}

json Forest::to_json() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(node_to_json(t.nodes(), 0));
  return json{{"format", "rocbench-forest"},
              {"version", 1},
              {"params",
               {{"n_estimators", params_.n_estimators},
                {"max_features", params_.max_features},
                {"min_samples_split", params_.min_samples_split},
                {"seed", params_.seed},
                {"bootstrap", params_.bootstrap}}},
              {"n_features", n_features_},
              {"trees", std::move(trees)}};
}

Forest Forest::from_json(const json& doc) {
  if (doc.value("format", std::string()) != "rocbench-forest") {
    throw std::invalid_argument("forest: not a forest document");
  }
  ForestParams p;
  const auto& jp = doc.at("params");
  p.n_estimators = jp.at("n_estimators").get<int>();
  p.max_features = jp.at("max_features").get<int>();
  p.min_samples_split = jp.at("min_samples_split").get<int>();
  p.seed = jp.at("seed").get<std::uint64_t>();
  p.bootstrap = jp.value("bootstrap", true);
  const auto dim = doc.at("n_features").get<Eigen::Index>();
  std::vector<DecisionTree> trees;
  for (const auto& jt : doc.at("trees")) {
    std::vector<TreeNode> nodes;
    node_from_json(jt, nodes, dim);
    trees.emplace_back(std::move(nodes));
  }
  if (trees.empty()) throw std::invalid_argument("forest: no trees");
  return Forest(p, dim, std::move(trees));
}

DecisionTree grow_tree(const Eigen::MatrixXd& x, std::span<const int> y,
                       std::vector<std::size_t> rows, int max_features,
                       int min_samples_split, std::uint64_t seed) {
  TreeBuilder builder(x, y, max_features, min_samples_split, seed);
  return DecisionTree(builder.build(std::move(rows)));
}

Forest train_forest(const Eigen::MatrixXd& x, std::span<const int> y, const ForestParams& params) {
  if (params.n_estimators < 1 || params.max_features < 1 || params.min_samples_split < 1) {
    throw std::invalid_argument("forest: parameters must be positive");
  }
  if (x.rows() == 0) throw std::invalid_argument("forest: empty training data");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw std::invalid_argument("forest: feature rows and labels differ in length");
  }
  if (x.cols() == 0) throw std::invalid_argument("forest: training data has no features");
  if (x.rows() < 2) throw std::invalid_argument("forest: need at least two records");
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("forest: labels must be 0/1");
    pos += static_cast<std::size_t>(v);
  }
  if (pos == 0 || pos == y.size()) throw std::invalid_argument("forest: training labels have a single class");
  if (!x.allFinite()) throw std::invalid_argument("forest: non-finite feature value");

  const auto n = static_cast<std::size_t>(x.rows());
  const int m = std::min<int>(params.max_features, static_cast<int>(x.cols()));
  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_estimators));
  for (int t = 0; t < params.n_estimators; ++t) {
    const auto tree_seed = substream_seed(params.seed, static_cast<std::uint64_t>(t));
    Rng rng(substream_seed(tree_seed, "bootstrap"));
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(rng);
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees.push_back(grow_tree(x, y, std::move(rows), m, params.min_samples_split,
                              substream_seed(tree_seed, "features")));
  }
  return Forest(params, x.cols(), std::move(trees));
}

void save_forest(const std::string& path, const Forest& forest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << forest.to_json().dump(1) << '\n';
}

Forest load_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Forest::from_json(json::parse(in));
}

}  // namespace rocbench
