#include "baselab/selection.hpp"

#include <algorithm>
#include <cmath>

#include "baselab/experiment.hpp"

namespace baselab {

const char* rowColorName(RowColor color) {
  switch (color) {
    case RowColor::Red: return "red";
    case RowColor::Yellow: return "yellow";
    case RowColor::Green: return "green";
    case RowColor::NotApplicable: return "not_applicable";
  }
  return "not_applicable";
}

const char* degenerateKindName(DegenerateKind kind) {
  return kind == DegenerateKind::ConstantRegression ? "constant_regression"
                                                    : "single_class_prediction";
}

RowColor colorCode(const std::optional<double>& testR2) {
  if (!testR2 || !std::isfinite(*testR2)) return RowColor::NotApplicable;
  if (*testR2 < 0.0) return RowColor::Red;
  if (*testR2 > 0.85) return RowColor::Green;
  return RowColor::Yellow;
}

namespace {

double spreadOf(const Eigen::VectorXd& values) {
  if (values.size() < 2) return 0.0;
  const double mean = values.mean();
  return std::sqrt((values.array() - mean).square().sum() /
                   static_cast<double>(values.size() - 1));
}

bool constantRegressionFolds(const std::vector<FoldRecord>& folds, double tolerance) {
  // With single-sample test folds (LOO) the per-fold spread test is vacuous,
  // so pool predictions across folds instead.
  bool allFoldsUsable = true;
  for (const auto& fold : folds) {
    if (fold.testTrueValues.size() < 2) {
      allFoldsUsable = false;
      break;
    }
  }
  if (allFoldsUsable) {
    for (const auto& fold : folds) {
      if (spreadOf(fold.testPredictions) > tolerance * spreadOf(fold.testTrueValues)) {
        return false;
      }
    }
    return true;
  }
  Eigen::Index total = 0;
  for (const auto& fold : folds) total += fold.testPredictions.size();
  Eigen::VectorXd pooledPred(total);
  Eigen::VectorXd pooledTrue(total);
  Eigen::Index pos = 0;
  for (const auto& fold : folds) {
    pooledPred.segment(pos, fold.testPredictions.size()) = fold.testPredictions;
    pooledTrue.segment(pos, fold.testTrueValues.size()) = fold.testTrueValues;
    pos += fold.testPredictions.size();
  }
  return spreadOf(pooledPred) <= tolerance * spreadOf(pooledTrue);
}

bool singleClassFolds(const std::vector<FoldRecord>& folds) {
  // Blind prediction means one fixed class over every fold's test output.
  long long theClass = 0;
  bool haveClass = false;
  for (const auto& fold : folds) {
    for (Eigen::Index i = 0; i < fold.testPredictions.size(); ++i) {
      const long long label = std::llround(fold.testPredictions[i]);
      if (!haveClass) {
        theClass = label;
        haveClass = true;
      } else if (label != theClass) {
        return false;
      }
    }
  }
  return haveClass;
}

}  // namespace

std::pair<bool, std::optional<DegenerateKind>> detectDegenerate(
    const std::vector<FoldRecord>& folds, TaskKind task, double tolerance) {
  if (folds.empty()) raise(ErrorKind::EmptyInput, "no folds to inspect");
  if (task == TaskKind::Classification) {
    if (singleClassFolds(folds)) return {true, DegenerateKind::SingleClassPrediction};
    return {false, std::nullopt};
  }
  if (constantRegressionFolds(folds, tolerance)) {
    return {true, DegenerateKind::ConstantRegression};
  }
  return {false, std::nullopt};
}

RowStatus makeRowStatus(TaskKind task, const std::optional<double>& testR2,
                        const std::vector<FoldRecord>& folds, double tolerance) {
  RowStatus status;
  status.color = task == TaskKind::Classification ? RowColor::NotApplicable : colorCode(testR2);
  const auto [degenerate, kind] = detectDegenerate(folds, task, tolerance);
  status.degenerate = degenerate;
  status.degenerateKind = kind;
  status.excludedFromSelection = degenerate || status.color == RowColor::Red;
  return status;
}

SelectionResult selectBest(const std::vector<SelectionRow>& rows) {
  SelectionResult result;
  std::vector<const SelectionRow*> eligible;
  for (const auto& row : rows) {
    if (row.status.excludedFromSelection) continue;
    if (row.task == TaskKind::Regression && row.status.color != RowColor::Green) continue;
    if (!row.diagnostics.lor && !row.diagnostics.cos) continue;
    eligible.push_back(&row);
    result.eligibleIds.push_back(row.experimentId);
  }

  auto pick = [&](auto key, bool hasValue(const SelectionRow&)) -> std::optional<std::string> {
    const SelectionRow* best = nullptr;
    bool tied = false;
    for (const SelectionRow* row : eligible) {
      if (!hasValue(*row)) continue;
      if (best == nullptr) {
        best = row;
        continue;
      }
      const double a = key(*row);
      const double b = key(*best);
      if (a < b) {
        best = row;
        tied = false;
      } else if (a == b) {
        tied = true;
        if (row->testMetricMean < best->testMetricMean ||
            (row->testMetricMean == best->testMetricMean &&
             row->experimentId < best->experimentId)) {
          best = row;
        }
      }
    }
    if (tied) {
      result.tieNote = result.tieNote.value_or(std::string()) +
                       "tie resolved by test metric mean, then experiment id; ";
    }
    if (best == nullptr) return std::nullopt;
    return best->experimentId;
  };

  result.bestLorExperimentId =
      pick([](const SelectionRow& r) { return std::abs(*r.diagnostics.lor); },
           [](const SelectionRow& r) { return r.diagnostics.lor.has_value(); });
  result.bestCosExperimentId =
      pick([](const SelectionRow& r) { return std::abs(*r.diagnostics.cos - 1.0); },
           [](const SelectionRow& r) { return r.diagnostics.cos.has_value(); });
  return result;
}

}  // namespace baselab
