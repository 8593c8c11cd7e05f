#include <omp.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "baselab/cart.hpp"
#include "learners_internal.hpp"

namespace baselab::detail {

using nlohmann::json;

namespace {

json treeToJson(const CartTree& tree) {
  json nodes = json::array();
  for (const auto& node : tree.nodes()) {
    json n = {{"feature", node.feature}, {"value", node.value}};
    if (!node.isLeaf()) {
      n["threshold"] = node.threshold;
      n["left"] = node.left;
      n["right"] = node.right;
    }
    if (!node.classFractions.empty()) n["class_fractions"] = node.classFractions;
    nodes.push_back(std::move(n));
  }
  return nodes;
}

class TreeCore final : public ModelCore {
 public:
  TreeCore(TaskKind task, int numClasses, CartTree tree)
      : task_(task), numClasses_(numClasses), tree_(std::move(tree)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X, int) const override {
    Eigen::VectorXd out(X.rows());
    for (int i = 0; i < X.rows(); ++i) out[i] = tree_.predictRow(X, i);
    return out;
  }

  Eigen::MatrixXd predictProba(const Eigen::MatrixXd& X, int threads) const override {
    if (task_ != TaskKind::Classification) return ModelCore::predictProba(X, threads);
    Eigen::MatrixXd proba(X.rows(), numClasses_);
    for (int i = 0; i < X.rows(); ++i) {
      const auto& fractions = tree_.nodes()[tree_.leafIndex(X, i)].classFractions;
      for (int c = 0; c < numClasses_; ++c) proba(i, c) = fractions[c];
    }
    return proba;
  }

  std::string parametersJson() const override {
    return json{{"model", "decision_tree"}, {"nodes", treeToJson(tree_)}}.dump();
  }

  int numClasses() const override { return numClasses_; }

  const CartTree& tree() const { return tree_; }

 private:
  TaskKind task_;
  int numClasses_;
  CartTree tree_;
};

class ForestCore final : public ModelCore {
 public:
  ForestCore(TaskKind task, int numClasses, std::vector<CartTree> trees)
      : task_(task), numClasses_(numClasses), trees_(std::move(trees)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X, int threads) const override {
    Eigen::VectorXd out(X.rows());
    const int n = static_cast<int>(X.rows());
    if (threads > 1) {
#pragma omp parallel for num_threads(threads) schedule(static)
      for (int i = 0; i < n; ++i) out[i] = predictOne(X, i);
    } else {
      for (int i = 0; i < n; ++i) out[i] = predictOne(X, i);
    }
    return out;
  }

  Eigen::MatrixXd predictProba(const Eigen::MatrixXd& X, int threads) const override {
    if (task_ != TaskKind::Classification) return ModelCore::predictProba(X, threads);
    Eigen::MatrixXd proba = Eigen::MatrixXd::Zero(X.rows(), numClasses_);
    const int n = static_cast<int>(X.rows());
    if (threads > 1) {
#pragma omp parallel for num_threads(threads) schedule(static)
      for (int i = 0; i < n; ++i) fillVoteRow(X, i, proba);
    } else {
      for (int i = 0; i < n; ++i) fillVoteRow(X, i, proba);
    }
    return proba;
  }

  std::string parametersJson() const override {
    json trees = json::array();
    for (const auto& tree : trees_) trees.push_back(treeToJson(tree));
    return json{{"model", "random_forest"}, {"trees", trees}}.dump();
  }

  int numClasses() const override { return numClasses_; }

  const std::vector<CartTree>& trees() const { return trees_; }

 private:
  // Tree contributions accumulate in index order so the result does not
  // depend on how prediction rows were scheduled.
  double predictOne(const Eigen::MatrixXd& X, int row) const {
    if (task_ == TaskKind::Regression) {
      double sum = 0.0;
      for (const auto& tree : trees_) sum += tree.predictRow(X, row);
      return sum / static_cast<double>(trees_.size());
    }
    std::vector<int> votes(numClasses_, 0);
    for (const auto& tree : trees_) {
      ++votes[static_cast<int>(std::llround(tree.predictRow(X, row)))];
    }
    int majority = 0;
    for (int c = 1; c < numClasses_; ++c) {
      if (votes[c] > votes[majority]) majority = c;
    }
    return majority;
  }

  void fillVoteRow(const Eigen::MatrixXd& X, int row, Eigen::MatrixXd& proba) const {
    for (const auto& tree : trees_) {
      proba(row, static_cast<int>(std::llround(tree.predictRow(X, row)))) +=
          1.0 / static_cast<double>(trees_.size());
    }
  }

  TaskKind task_;
  int numClasses_;
  std::vector<CartTree> trees_;
};

CartConfig treeConfig(const LearnerSpec& spec, const Eigen::VectorXd& y, int maxFeatures) {
  CartConfig config;
  config.task = spec.taskKind;
  const HyperReader hp(spec);
  config.maxDepth = hp.getInt("max_depth");
  config.minSamplesLeaf = hp.getInt("min_samples_leaf");
  config.maxFeatures = maxFeatures;
  if (spec.taskKind == TaskKind::Classification) config.numClasses = inferNumClasses(y);
  return config;
}

}  // namespace

FitOutput fitTree(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const CartConfig config = treeConfig(spec, y, 0);
  std::vector<int> rows(X.rows());
  std::iota(rows.begin(), rows.end(), 0);
  FitOutput out;
  out.core = std::make_shared<TreeCore>(spec.taskKind, config.numClasses,
                                        CartTree::grow(X, y, config, rows));
  return out;
}

FitOutput fitForest(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    int threads) {
  const HyperReader hp(spec);
  const int numTrees = hp.getInt("n_trees");
  const bool bootstrap = hp.getInt("bootstrap") != 0;
  const int p = static_cast<int>(X.cols());
  int maxFeatures = hp.getInt("max_features");
  if (maxFeatures == 0) {
    // Conventional defaults: sqrt(p) for classification, p/3 for regression.
    maxFeatures = spec.taskKind == TaskKind::Classification
                      ? std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p))))
                      : std::max(1, p / 3);
  }
  maxFeatures = std::min(maxFeatures, p);
  const CartConfig config = treeConfig(spec, y, maxFeatures);
  const int n = static_cast<int>(X.rows());

  // Tree i draws everything from a sub-seed mixed from (seed, i), so the
  // forest is identical no matter how trees are scheduled.
  std::vector<CartTree> trees(numTrees);
  auto growTree = [&](int i) {
    Rng rng(mixSeed(spec.seed, static_cast<std::uint64_t>(i)));
    std::vector<int> rows(n);
    if (bootstrap) {
      for (int r = 0; r < n; ++r) rows[r] = static_cast<int>(rng.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees[i] = CartTree::grow(X, y, config, rows, &rng);
  };
  if (threads > 1) {
#pragma omp parallel for num_threads(threads) schedule(static)
    for (int i = 0; i < numTrees; ++i) growTree(i);
  } else {
    for (int i = 0; i < numTrees; ++i) growTree(i);
  }

  FitOutput out;
  out.core = std::make_shared<ForestCore>(spec.taskKind, config.numClasses, std::move(trees));
  return out;
}

}  // namespace baselab::detail
