#pragma once

#include <optional>
#include <string>
#include <vector>

#include "baselab/common.hpp"
#include "baselab/metrics.hpp"

namespace baselab {

struct FoldRecord;

enum class RowColor { Red, Yellow, Green, NotApplicable };
enum class DegenerateKind { ConstantRegression, SingleClassPrediction };

const char* rowColorName(RowColor color);
const char* degenerateKindName(DegenerateKind kind);

struct RowStatus {
  RowColor color = RowColor::NotApplicable;
  bool degenerate = false;
  std::optional<DegenerateKind> degenerateKind;
  bool excludedFromSelection = false;
};

// Red below 0, yellow up to and including 0.85, green strictly above.
RowColor colorCode(const std::optional<double>& testR2);

// A model that never left one class, or whose regression predictions barely
// spread relative to the targets, did not learn anything worth ranking.
std::pair<bool, std::optional<DegenerateKind>> detectDegenerate(
    const std::vector<FoldRecord>& folds, TaskKind task, double tolerance = 0.01);

RowStatus makeRowStatus(TaskKind task, const std::optional<double>& testR2,
                        const std::vector<FoldRecord>& folds, double tolerance = 0.01);

struct SelectionRow {
  std::string experimentId;
  TaskKind task = TaskKind::Regression;
  OverfitDiagnostics diagnostics;
  RowStatus status;
  double testMetricMean = 0.0;  // tie-break key
};

struct SelectionResult {
  std::optional<std::string> bestLorExperimentId;
  std::optional<std::string> bestCosExperimentId;
  std::vector<std::string> eligibleIds;
  std::optional<std::string> tieNote;
};

SelectionResult selectBest(const std::vector<SelectionRow>& rows);

}  // namespace baselab
