#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "baselab/common.hpp"

namespace baselab {

enum class SplitMethod { Loo, KFold, MonteCarlo };

const char* splitMethodName(SplitMethod method);
SplitMethod parseSplitMethod(const std::string& name);

struct SplitPlan {
  SplitMethod method = SplitMethod::KFold;
  int k = 5;                  // kfold
  int numSplits = 10;         // monte_carlo
  double testFraction = 0.2;  // monte_carlo
  bool shuffle = false;
  bool stratified = false;
  std::uint64_t seed = 0;
};

struct FoldAssignment {
  int foldIndex = 0;
  std::vector<int> trainIndices;
  std::vector<int> testIndices;
};

// labels are required only for stratified plans (classification).
std::vector<FoldAssignment> makeSplits(const SplitPlan& plan, int numSamples,
                                       const std::optional<Eigen::VectorXd>& labels = std::nullopt);

}  // namespace baselab
