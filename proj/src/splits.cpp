#include "baselab/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace baselab {

namespace {

// Deals (optionally shuffled) indices into k blocks whose sizes differ by at
// most one; the first (n mod k) blocks take the extra element.
std::vector<std::vector<int>> dealKFold(const std::vector<int>& indices, int k, bool shuffle,
                                        std::uint64_t seed) {
  std::vector<int> order = indices;
  if (shuffle) {
    Rng rng(mixSeed(seed, 0));
    rng.shuffle(order);
  }
  const int n = static_cast<int>(order.size());
  const int base = n / k;
  const int extra = n % k;
  std::vector<std::vector<int>> blocks(k);
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    blocks[f].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return blocks;
}

std::vector<int> permuted(const std::vector<int>& indices, std::uint64_t seed) {
  std::vector<int> order = indices;
  Rng rng(seed);
  rng.shuffle(order);
  return order;
}

void finalizeFold(FoldAssignment& fold) {
  std::sort(fold.trainIndices.begin(), fold.trainIndices.end());
  std::sort(fold.testIndices.begin(), fold.testIndices.end());
}

std::vector<FoldAssignment> splitsForGroup(const SplitPlan& plan, const std::vector<int>& indices) {
  const int n = static_cast<int>(indices.size());
  std::vector<FoldAssignment> folds;
  switch (plan.method) {
    case SplitMethod::Loo: {
      for (int i = 0; i < n; ++i) {
        FoldAssignment fold;
        fold.foldIndex = i;
        fold.testIndices.push_back(indices[i]);
        for (int j = 0; j < n; ++j) {
          if (j != i) fold.trainIndices.push_back(indices[j]);
        }
        folds.push_back(std::move(fold));
      }
      break;
    }
    case SplitMethod::KFold: {
      const auto blocks = dealKFold(indices, plan.k, plan.shuffle, plan.seed);
      for (int f = 0; f < plan.k; ++f) {
        FoldAssignment fold;
        fold.foldIndex = f;
        fold.testIndices = blocks[f];
        for (int g = 0; g < plan.k; ++g) {
          if (g == f) continue;
          fold.trainIndices.insert(fold.trainIndices.end(), blocks[g].begin(), blocks[g].end());
        }
        folds.push_back(std::move(fold));
      }
      break;
    }
    case SplitMethod::MonteCarlo: {
      const int testSize = static_cast<int>(std::ceil(plan.testFraction * n));
      for (int s = 0; s < plan.numSplits; ++s) {
        const auto order = permuted(indices, mixSeed(plan.seed, static_cast<std::uint64_t>(s)));
        FoldAssignment fold;
        fold.foldIndex = s;
        fold.testIndices.assign(order.begin(), order.begin() + testSize);
        fold.trainIndices.assign(order.begin() + testSize, order.end());
        folds.push_back(std::move(fold));
      }
      break;
    }
  }
  return folds;
}

void validatePlan(const SplitPlan& plan, int numSamples) {
  if (numSamples < 2) raise(ErrorKind::InvalidPlan, "need at least 2 samples to split");
  switch (plan.method) {
    case SplitMethod::Loo:
      break;
    case SplitMethod::KFold:
      if (plan.k < 2 || plan.k > numSamples) {
        raise(ErrorKind::InvalidPlan, "kfold requires 2 <= k <= n, got k=" +
                                          std::to_string(plan.k) + " with n=" +
                                          std::to_string(numSamples));
      }
      break;
    case SplitMethod::MonteCarlo: {
      if (plan.numSplits < 1) raise(ErrorKind::InvalidPlan, "monte_carlo requires n_splits >= 1");
      if (!(plan.testFraction > 0.0) || !(plan.testFraction < 1.0)) {
        raise(ErrorKind::InvalidPlan, "monte_carlo test_fraction must lie in (0, 1)");
      }
      const int testSize = static_cast<int>(std::ceil(plan.testFraction * numSamples));
      if (testSize >= numSamples) {
        raise(ErrorKind::InvalidPlan, "monte_carlo split leaves an empty train partition");
      }
      break;
    }
  }
}

}  // namespace

const char* splitMethodName(SplitMethod method) {
  switch (method) {
    case SplitMethod::Loo: return "loo";
    case SplitMethod::KFold: return "kfold";
    case SplitMethod::MonteCarlo: return "monte_carlo";
  }
  return "unknown";
}

SplitMethod parseSplitMethod(const std::string& name) {
  if (name == "loo") return SplitMethod::Loo;
  if (name == "kfold") return SplitMethod::KFold;
  if (name == "monte_carlo") return SplitMethod::MonteCarlo;
  raise(ErrorKind::InvalidArgument, "unknown cv method '" + name + "'");
}

std::vector<FoldAssignment> makeSplits(const SplitPlan& plan, int numSamples,
                                       const std::optional<Eigen::VectorXd>& labels) {
  validatePlan(plan, numSamples);

  const bool stratify = plan.stratified && plan.method != SplitMethod::Loo;
  if (stratify && !labels) {
    raise(ErrorKind::InvalidArgument, "stratified splits require class labels");
  }

  std::vector<FoldAssignment> folds;
  if (!stratify) {
    std::vector<int> indices(numSamples);
    std::iota(indices.begin(), indices.end(), 0);
    folds = splitsForGroup(plan, indices);
  } else {
    // Group indices per class in label order, split each group with the same
    // scheme, then merge fold-by-fold.
    std::map<long long, std::vector<int>> byClass;
    for (int i = 0; i < numSamples; ++i) byClass[std::llround((*labels)[i])].push_back(i);

    const int minRequired = plan.method == SplitMethod::KFold ? plan.k : 2;
    for (const auto& [label, members] : byClass) {
      if (static_cast<int>(members.size()) < minRequired) {
        raise(ErrorKind::StratificationImpossible,
              "class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                  " members but every fold needs at least " + std::to_string(minRequired) +
                  "; drop stratification or merge classes");
      }
    }

    const int numFolds =
        plan.method == SplitMethod::KFold ? plan.k : plan.numSplits;
    folds.resize(numFolds);
    for (int f = 0; f < numFolds; ++f) folds[f].foldIndex = f;
    std::uint64_t classStream = 0;
    for (const auto& [label, members] : byClass) {
      SplitPlan classPlan = plan;
      classPlan.seed = mixSeed(plan.seed, 0x5354524154ULL + classStream);
      ++classStream;
      const auto classFolds = splitsForGroup(classPlan, members);
      for (int f = 0; f < numFolds; ++f) {
        folds[f].trainIndices.insert(folds[f].trainIndices.end(),
                                     classFolds[f].trainIndices.begin(),
                                     classFolds[f].trainIndices.end());
        folds[f].testIndices.insert(folds[f].testIndices.end(),
                                    classFolds[f].testIndices.begin(),
                                    classFolds[f].testIndices.end());
      }
    }
  }

  for (auto& fold : folds) {
    finalizeFold(fold);
    if (fold.trainIndices.empty() || fold.testIndices.empty()) {
      raise(ErrorKind::InvalidPlan, "fold " + std::to_string(fold.foldIndex) +
                                        " has an empty partition");
    }
  }
  return folds;
}

}  // namespace baselab
