#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "baselab/dataset.hpp"
#include "baselab/learners.hpp"
#include "baselab/metrics.hpp"
#include "baselab/selection.hpp"
#include "baselab/splits.hpp"

namespace baselab {

struct PreprocessStep {
  TransformKind kind = TransformKind::Identity;
  TransformScope scope = TransformScope::PerFold;
};

// One plan row: a full experiment configuration.
struct ExperimentSpec {
  std::string experimentId;
  TaskKind task = TaskKind::Regression;
  std::string datasetRef;  // snapshot id or manifest path
  std::vector<PreprocessStep> preprocessing;
  LearnerSpec learner;
  std::vector<std::string> metricNames;
  SplitPlan splitPlan;
  std::string notes;
};

struct FoldRecord {
  std::string experimentId;
  int foldIndex = 0;
  // NaN marks an undefined value (r2 on a constant or single-sample fold).
  std::map<std::string, double> trainMetrics;
  std::map<std::string, double> testMetrics;
  Eigen::VectorXd testPredictions;
  Eigen::VectorXd testTrueValues;
  std::vector<std::vector<long long>> trainConfusion;  // classification
  std::vector<std::vector<long long>> testConfusion;
  std::optional<TrainingTrace> trainingTrace;
  bool degenerateFlag = false;  // this fold's test predictions collapsed
  std::vector<TransformSpec> foldTransforms;  // per-fold fitted specs, in order
  std::vector<int> trainIndices;
  std::vector<int> testIndices;
};

std::vector<std::string> validateExperimentSpec(const ExperimentSpec& spec);

// Runs one experiment end to end: per-fold transform fitting on train rows
// only, learner fit, metrics on both partitions. Records come back ordered
// by fold index whatever the schedule, and jobs > 1 runs folds in parallel.
std::vector<FoldRecord> runExperiment(const ExperimentSpec& spec, const DatasetSnapshot& snapshot,
                                      int jobs = 1);

struct ExperimentOutcome {
  ExperimentSpec spec;
  std::string snapshotId;
  std::vector<FoldRecord> folds;
  std::map<std::string, MetricSummary> summaries;  // keyed by metric name
  OverfitDiagnostics diagnostics;
  std::string diagnosticMetric;  // empty when no error metric was requested
  RowStatus status;
  std::optional<double> r2TestMean;
  bool unequalFoldSizes = false;
  int numClasses = 0;
};

// Which requested metric drives LOR/COS: mae, else mse, else rmse.
std::string pickDiagnosticMetric(const std::vector<std::string>& metricNames);

ExperimentOutcome summarizeExperiment(const ExperimentSpec& spec, const DatasetSnapshot& snapshot,
                                      std::vector<FoldRecord> folds,
                                      const DiagnosticsConfig& config);

}  // namespace baselab
