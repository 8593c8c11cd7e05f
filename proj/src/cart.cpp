#include "baselab/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace baselab {

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
  bool found() const { return feature >= 0; }
};

double giniOf(const std::vector<long long>& counts, long long total) {
  double g = 1.0;
  for (long long c : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(total);
    g -= f * f;
  }
  return g;
}

struct Builder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const CartConfig& config;
  Rng* featureRng;
  std::vector<CartNode> nodes;

  std::vector<int> candidateFeatures() {
    const int p = static_cast<int>(X.cols());
    if (featureRng == nullptr || config.maxFeatures <= 0 || config.maxFeatures >= p) {
      std::vector<int> all(p);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    std::vector<int> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < config.maxFeatures; ++i) {
      const int j = i + static_cast<int>(featureRng->below(p - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(config.maxFeatures);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  SplitChoice bestSplitClassification(const std::vector<int>& rows, const std::vector<int>& feats,
                                      const std::vector<long long>& parentCounts) {
    const long long n = static_cast<long long>(rows.size());
    const double parentGini = giniOf(parentCounts, n);
    SplitChoice best;
    std::vector<std::pair<double, double>> pts(rows.size());
    std::vector<long long> leftCounts(config.numClasses);
    for (int f : feats) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        pts[i] = {X(rows[i], f), y[rows[i]]};
      }
      std::sort(pts.begin(), pts.end());
      std::fill(leftCounts.begin(), leftCounts.end(), 0);
      for (std::size_t pos = 1; pos < pts.size(); ++pos) {
        ++leftCounts[static_cast<int>(std::llround(pts[pos - 1].second))];
        if (pts[pos].first == pts[pos - 1].first) continue;
        const long long nL = static_cast<long long>(pos);
        const long long nR = n - nL;
        if (nL < config.minSamplesLeaf || nR < config.minSamplesLeaf) continue;
        double giniL = 1.0;
        double giniR = 1.0;
        for (int c = 0; c < config.numClasses; ++c) {
          const double fl = static_cast<double>(leftCounts[c]) / static_cast<double>(nL);
          const double fr = static_cast<double>(parentCounts[c] - leftCounts[c]) /
                            static_cast<double>(nR);
          giniL -= fl * fl;
          giniR -= fr * fr;
        }
        const double gain = parentGini -
                            (static_cast<double>(nL) * giniL + static_cast<double>(nR) * giniR) /
                                static_cast<double>(n);
        if (gain > best.gain) {
          double threshold = (pts[pos - 1].first + pts[pos].first) / 2.0;
          if (!(threshold < pts[pos].first)) threshold = pts[pos - 1].first;
          best = {f, threshold, gain};
        }
      }
    }
    return best;
  }

  SplitChoice bestSplitRegression(const std::vector<int>& rows, const std::vector<int>& feats,
                                  double parentSse) {
    const long long n = static_cast<long long>(rows.size());
    SplitChoice best;
    std::vector<std::pair<double, double>> pts(rows.size());
    for (int f : feats) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        pts[i] = {X(rows[i], f), y[rows[i]]};
      }
      std::sort(pts.begin(), pts.end());
      double totalSum = 0.0;
      double totalSq = 0.0;
      for (const auto& [v, t] : pts) {
        totalSum += t;
        totalSq += t * t;
      }
      double leftSum = 0.0;
      double leftSq = 0.0;
      for (std::size_t pos = 1; pos < pts.size(); ++pos) {
        leftSum += pts[pos - 1].second;
        leftSq += pts[pos - 1].second * pts[pos - 1].second;
        if (pts[pos].first == pts[pos - 1].first) continue;
        const long long nL = static_cast<long long>(pos);
        const long long nR = n - nL;
        if (nL < config.minSamplesLeaf || nR < config.minSamplesLeaf) continue;
        const double sseL = std::max(0.0, leftSq - leftSum * leftSum / static_cast<double>(nL));
        const double rightSum = totalSum - leftSum;
        const double sseR =
            std::max(0.0, (totalSq - leftSq) - rightSum * rightSum / static_cast<double>(nR));
        const double gain = parentSse - (sseL + sseR);
        if (gain > best.gain) {
          double threshold = (pts[pos - 1].first + pts[pos].first) / 2.0;
          if (!(threshold < pts[pos].first)) threshold = pts[pos - 1].first;
          best = {f, threshold, gain};
        }
      }
    }
    return best;
  }

  int makeLeaf(const std::vector<int>& rows) {
    CartNode leaf;
    if (config.task == TaskKind::Classification) {
      std::vector<long long> counts(config.numClasses, 0);
      for (int r : rows) ++counts[static_cast<int>(std::llround(y[r]))];
      int majority = 0;
      for (int c = 1; c < config.numClasses; ++c) {
        if (counts[c] > counts[majority]) majority = c;
      }
      leaf.value = majority;
      leaf.classFractions.resize(config.numClasses);
      for (int c = 0; c < config.numClasses; ++c) {
        leaf.classFractions[c] =
            static_cast<double>(counts[c]) / static_cast<double>(rows.size());
      }
    } else {
      double sum = 0.0;
      for (int r : rows) sum += y[r];
      leaf.value = sum / static_cast<double>(rows.size());
    }
    nodes.push_back(std::move(leaf));
    return static_cast<int>(nodes.size()) - 1;
  }

  int build(const std::vector<int>& rows, int depth) {
    bool pure = false;
    std::vector<long long> counts;
    double parentSse = 0.0;
    if (config.task == TaskKind::Classification) {
      counts.assign(config.numClasses, 0);
      for (int r : rows) ++counts[static_cast<int>(std::llround(y[r]))];
      pure = *std::max_element(counts.begin(), counts.end()) ==
             static_cast<long long>(rows.size());
    } else {
      double sum = 0.0;
      double sq = 0.0;
      for (int r : rows) {
        sum += y[r];
        sq += y[r] * y[r];
      }
      const double mean = sum / static_cast<double>(rows.size());
      for (int r : rows) {
        const double d = y[r] - mean;
        parentSse += d * d;
      }
      pure = parentSse <= 1e-12 * std::max(1.0, sq);
    }

    const bool depthCap = config.maxDepth > 0 && depth >= config.maxDepth;
    if (pure || depthCap || static_cast<int>(rows.size()) < 2 * config.minSamplesLeaf) {
      return makeLeaf(rows);
    }

    const auto feats = candidateFeatures();
    const SplitChoice split = config.task == TaskKind::Classification
                                  ? bestSplitClassification(rows, feats, counts)
                                  : bestSplitRegression(rows, feats, parentSse);
    if (!split.found()) return makeLeaf(rows);

    std::vector<int> leftRows;
    std::vector<int> rightRows;
    for (int r : rows) {
      (X(r, split.feature) <= split.threshold ? leftRows : rightRows).push_back(r);
    }

    const int self = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[self].feature = split.feature;
    nodes[self].threshold = split.threshold;
    const int left = build(leftRows, depth + 1);
    const int right = build(rightRows, depth + 1);
    nodes[self].left = left;
    nodes[self].right = right;
    return self;
  }
};

}  // namespace

CartTree CartTree::grow(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                        const CartConfig& config, const std::vector<int>& rows, Rng* featureRng) {
  if (rows.empty()) raise(ErrorKind::InsufficientData, "cannot grow a tree from zero rows");
  Builder builder{features, target, config, featureRng, {}};
  builder.build(rows, 0);
  CartTree tree;
  tree.nodes_ = std::move(builder.nodes);
  return tree;
}

int CartTree::leafIndex(const Eigen::MatrixXd& features, int row) const {
  int node = 0;
  while (!nodes_[node].isLeaf()) {
    node = features(row, nodes_[node].feature) <= nodes_[node].threshold ? nodes_[node].left
                                                                         : nodes_[node].right;
  }
  return node;
}

double CartTree::predictRow(const Eigen::MatrixXd& features, int row) const {
  return nodes_[leafIndex(features, row)].value;
}

}  // namespace baselab
