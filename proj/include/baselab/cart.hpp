#pragma once

#include <Eigen/Dense>
#include <vector>

#include "baselab/common.hpp"

namespace baselab {

struct CartConfig {
  TaskKind task = TaskKind::Regression;
  int maxDepth = 0;  // 0 = unlimited
  int minSamplesLeaf = 1;
  int numClasses = 0;   // classification only
  int maxFeatures = 0;  // 0 or >= n_features = consider all features
};

struct CartNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;                  // mean or majority class
  std::vector<double> classFractions;  // classification leaves

  bool isLeaf() const { return feature < 0; }
  bool operator==(const CartNode& other) const = default;
};

// CART with exhaustive midpoint threshold search. Ties in impurity gain
// resolve to the lowest feature index, then the lowest threshold. An impure
// node splits even at zero gain so long as a valid boundary exists.
class CartTree {
 public:
  static CartTree grow(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                       const CartConfig& config, const std::vector<int>& rows,
                       Rng* featureRng = nullptr);

  int leafIndex(const Eigen::MatrixXd& features, int row) const;
  double predictRow(const Eigen::MatrixXd& features, int row) const;
  const std::vector<CartNode>& nodes() const { return nodes_; }

  bool operator==(const CartTree& other) const { return nodes_ == other.nodes_; }

 private:
  std::vector<CartNode> nodes_;
};

}  // namespace baselab
