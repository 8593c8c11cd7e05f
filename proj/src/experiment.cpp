#include "baselab/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

namespace baselab {

namespace {

bool looksLikeSnapshotId(const std::string& ref) {
  if (ref.size() != 64) return false;
  return std::all_of(ref.begin(), ref.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
}

Eigen::MatrixXd takeRows(const Eigen::MatrixXd& source, const std::vector<int>& rows) {
  Eigen::MatrixXd out(rows.size(), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = source.row(rows[i]);
  return out;
}

Eigen::VectorXd takeEntries(const Eigen::VectorXd& source, const std::vector<int>& rows) {
  Eigen::VectorXd out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = source[rows[i]];
  return out;
}

bool foldPredictionsCollapsed(const FoldRecord& fold, TaskKind task, double tolerance) {
  if (task == TaskKind::Classification) {
    for (Eigen::Index i = 1; i < fold.testPredictions.size(); ++i) {
      if (std::llround(fold.testPredictions[i]) != std::llround(fold.testPredictions[0])) {
        return false;
      }
    }
    return fold.testPredictions.size() > 0;
  }
  auto spread = [](const Eigen::VectorXd& v) {
    if (v.size() < 2) return 0.0;
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
  };
  return spread(fold.testPredictions) <= tolerance * spread(fold.testTrueValues);
}

}  // namespace

std::string pickDiagnosticMetric(const std::vector<std::string>& metricNames) {
  for (const char* candidate : {"mae", "mse", "rmse"}) {
    if (std::find(metricNames.begin(), metricNames.end(), candidate) != metricNames.end()) {
      return candidate;
    }
  }
  return "";
}

std::vector<std::string> validateExperimentSpec(const ExperimentSpec& spec) {
  std::vector<std::string> problems;
  if (spec.experimentId.empty()) problems.push_back("experiment id must not be empty");
  if (spec.datasetRef.empty()) problems.push_back("dataset reference must not be empty");

  if (spec.metricNames.empty()) {
    problems.push_back("at least one metric is required");
  }
  for (const auto& metric : spec.metricNames) {
    if (metric == "confusion_matrix") {
      problems.push_back(
          "'confusion_matrix' is recorded automatically for classification and is "
          "not a scalar metric; remove it from the metric list");
      continue;
    }
    const bool knownRegression =
        std::find(regressionMetricNames().begin(), regressionMetricNames().end(), metric) !=
        regressionMetricNames().end();
    const bool knownClassification =
        std::find(classificationMetricNames().begin(), classificationMetricNames().end(),
                  metric) != classificationMetricNames().end();
    if (!knownRegression && !knownClassification) {
      problems.push_back("unknown metric '" + metric + "'");
    } else if (!metricCompatible(metric, spec.task)) {
      problems.push_back("metric '" + metric + "' is not defined for task '" +
                         std::string(taskName(spec.task)) + "'");
    }
  }

  if (spec.learner.taskKind != spec.task) {
    problems.push_back("learner task does not match experiment task");
  }
  for (const auto& p : validateLearnerSpec(spec.learner)) problems.push_back(p);

  bool sawPerFold = false;
  for (const auto& step : spec.preprocessing) {
    if (step.scope == TransformScope::PerFold) {
      sawPerFold = true;
    } else if (sawPerFold) {
      problems.push_back(
          "global-scoped transforms must precede per-fold ones (global transforms are "
          "applied before splitting)");
      break;
    }
  }

  switch (spec.splitPlan.method) {
    case SplitMethod::Loo:
      break;
    case SplitMethod::KFold:
      if (spec.splitPlan.k < 2) problems.push_back("kfold requires k >= 2");
      break;
    case SplitMethod::MonteCarlo:
      if (spec.splitPlan.numSplits < 1) problems.push_back("monte_carlo requires n_splits >= 1");
      if (!(spec.splitPlan.testFraction > 0.0) || !(spec.splitPlan.testFraction < 1.0)) {
        problems.push_back("monte_carlo test_fraction must lie in (0, 1)");
      }
      break;
  }
  if (spec.splitPlan.stratified && spec.task != TaskKind::Classification) {
    problems.push_back("stratified splits require a classification task");
  }
  return problems;
}

std::vector<FoldRecord> runExperiment(const ExperimentSpec& spec, const DatasetSnapshot& snapshot,
                                      int jobs) {
  const auto problems = validateExperimentSpec(spec);
  if (!problems.empty()) {
    std::string joined = "experiment '" + spec.experimentId + "': ";
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (i) joined += "; ";
      joined += problems[i];
    }
    raise(ErrorKind::InvalidPlan, joined);
  }
  if (looksLikeSnapshotId(spec.datasetRef) && spec.datasetRef != snapshot.snapshotId) {
    raise(ErrorKind::HashMismatch, "experiment '" + spec.experimentId + "': dataset_ref " +
                                       spec.datasetRef + " does not match snapshot " +
                                       snapshot.snapshotId);
  }
  if (spec.task != snapshot.taskKind) {
    raise(ErrorKind::InvalidPlan, "experiment '" + spec.experimentId + "': task '" +
                                      taskName(spec.task) + "' but snapshot holds a " +
                                      taskName(snapshot.taskKind) + " target");
  }

  // Global transforms run once, before splitting; their statistics see the
  // whole dataset by construction.
  Eigen::MatrixXd base = snapshot.features;
  for (const auto& step : spec.preprocessing) {
    if (step.scope != TransformScope::Global) continue;
    const TransformSpec fitted = fitTransform(base, step.kind, TransformScope::Global);
    applyTransformInPlace(base, fitted);
  }

  std::optional<Eigen::VectorXd> labels;
  if (spec.task == TaskKind::Classification) labels = snapshot.target;
  const auto assignments = makeSplits(spec.splitPlan, snapshot.numSamples(), labels);
  const int numClasses = snapshot.numClasses();
  const int numFolds = static_cast<int>(assignments.size());

  std::vector<FoldRecord> records(numFolds);
  std::mutex errorMutex;
  std::optional<Error> firstError;
  int firstErrorFold = std::numeric_limits<int>::max();

  auto runFold = [&](int f, int learnerThreads) {
    const auto& assignment = assignments[f];
    FoldRecord record;
    record.experimentId = spec.experimentId;
    record.foldIndex = assignment.foldIndex;
    record.trainIndices = assignment.trainIndices;
    record.testIndices = assignment.testIndices;

    Eigen::MatrixXd work = base;
    for (const auto& step : spec.preprocessing) {
      if (step.scope != TransformScope::PerFold) continue;
      const TransformSpec fitted =
          fitTransform(work, step.kind, TransformScope::PerFold, &assignment.trainIndices);
      applyTransformInPlace(work, fitted);
      record.foldTransforms.push_back(fitted);
    }

    const Eigen::MatrixXd trainX = takeRows(work, assignment.trainIndices);
    const Eigen::VectorXd trainY = takeEntries(snapshot.target, assignment.trainIndices);
    const Eigen::MatrixXd testX = takeRows(work, assignment.testIndices);
    const Eigen::VectorXd testY = takeEntries(snapshot.target, assignment.testIndices);

    const FittedModel model = fit(spec.learner, trainX, trainY, learnerThreads);
    const Eigen::VectorXd trainPred = model.predict(trainX, learnerThreads);
    const Eigen::VectorXd testPred = model.predict(testX, learnerThreads);

    for (const auto& metric : spec.metricNames) {
      record.trainMetrics[metric] = computeMetric(metric, trainY, trainPred, numClasses);
      record.testMetrics[metric] = computeMetric(metric, testY, testPred, numClasses);
    }
    if (spec.task == TaskKind::Classification) {
      record.trainConfusion = confusionMatrix(trainY, trainPred, numClasses);
      record.testConfusion = confusionMatrix(testY, testPred, numClasses);
    }
    record.testPredictions = testPred;
    record.testTrueValues = testY;
    record.trainingTrace = model.trace();
    record.degenerateFlag = foldPredictionsCollapsed(record, spec.task, 0.01);
    records[f] = std::move(record);
  };

  auto guardedRun = [&](int f, int learnerThreads) {
    try {
      runFold(f, learnerThreads);
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(errorMutex);
      if (f < firstErrorFold) {
        firstErrorFold = f;
        firstError = Error(e.kind(), "experiment '" + spec.experimentId + "' fold " +
                                         std::to_string(f) + ": " + e.what());
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(errorMutex);
      if (f < firstErrorFold) {
        firstErrorFold = f;
        firstError = Error(ErrorKind::InvalidArgument,
                           "experiment '" + spec.experimentId + "' fold " + std::to_string(f) +
                               ": " + e.what());
      }
    }
  };

  if (jobs > 1) {
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
    for (int f = 0; f < numFolds; ++f) guardedRun(f, 1);
  } else {
    for (int f = 0; f < numFolds; ++f) {
      guardedRun(f, jobs < 1 ? 1 : jobs);
      if (firstError) break;
    }
  }
  if (firstError) throw *firstError;

  std::sort(records.begin(), records.end(),
            [](const FoldRecord& a, const FoldRecord& b) { return a.foldIndex < b.foldIndex; });
  return records;
}

ExperimentOutcome summarizeExperiment(const ExperimentSpec& spec, const DatasetSnapshot& snapshot,
                                      std::vector<FoldRecord> folds,
                                      const DiagnosticsConfig& config) {
  ExperimentOutcome outcome;
  outcome.spec = spec;
  outcome.snapshotId = snapshot.snapshotId;
  outcome.numClasses = snapshot.numClasses();

  for (const auto& metric : spec.metricNames) {
    std::vector<double> train;
    std::vector<double> test;
    train.reserve(folds.size());
    test.reserve(folds.size());
    for (const auto& fold : folds) {
      train.push_back(fold.trainMetrics.at(metric));
      test.push_back(fold.testMetrics.at(metric));
    }
    outcome.summaries[metric] = aggregate(train, test, metric);
  }

  outcome.diagnosticMetric = pickDiagnosticMetric(spec.metricNames);
  if (!outcome.diagnosticMetric.empty()) {
    outcome.diagnostics = diagnostics(outcome.summaries.at(outcome.diagnosticMetric), config);
  } else {
    outcome.diagnostics.alpha = config.alpha;
    outcome.diagnostics.beta = config.beta;
  }

  if (auto it = outcome.summaries.find("r2"); it != outcome.summaries.end()) {
    if (std::isfinite(it->second.testMean)) outcome.r2TestMean = it->second.testMean;
  }
  outcome.status =
      makeRowStatus(spec.task, outcome.r2TestMean, folds, config.degenerateTolerance);

  for (std::size_t f = 1; f < folds.size(); ++f) {
    if (folds[f].testIndices.size() != folds[0].testIndices.size()) {
      outcome.unequalFoldSizes = true;
      break;
    }
  }
  outcome.folds = std::move(folds);
  return outcome;
}

}  // namespace baselab
