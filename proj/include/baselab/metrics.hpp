#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "baselab/common.hpp"

namespace baselab {

struct MetricSummary {
  std::string metricName;
  double trainMean = 0.0;
  double trainStd = 0.0;
  double testMean = 0.0;
  double testStd = 0.0;
  int numFolds = 0;
  std::vector<double> perFoldTrain;
  std::vector<double> perFoldTest;
  bool singleFoldWarning = false;
};

enum class LorClass { Ideal, Overfitting, Underfitting, Undefined };
enum class CosClass { Optimal, Overfitting, Underfitting, Undefined };
enum class UndefinedReason { ZeroTestMean, ZeroTestStd, ZeroTrainMean };

const char* lorClassName(LorClass c);
const char* cosClassName(CosClass c);
const char* undefinedReasonName(UndefinedReason r);

struct OverfitDiagnostics {
  std::optional<double> lor;
  std::optional<double> cos;
  double alpha = 0.5;
  double beta = 0.5;
  LorClass lorClass = LorClass::Undefined;
  CosClass cosClass = CosClass::Undefined;
  std::optional<double> cosDeviation;  // cos - 1
  std::optional<UndefinedReason> undefinedReason;
};

struct DiagnosticsConfig {
  double alpha = 0.5;
  double beta = 0.5;
  double epsilonIdeal = 0.02;
  double logBase = 10.0;
  double degenerateTolerance = 0.01;
};

double mae(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred);
double mse(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred);
double rmse(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred);

// 1 - SS_res/SS_tot. Undefined for a constant target (SS_tot = 0).
std::optional<double> rSquared(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred);

double accuracy(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred);

enum class F1Averaging { Binary, Macro };
double f1Score(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred, F1Averaging averaging,
               int numClasses);

std::vector<std::vector<long long>> confusionMatrix(const Eigen::VectorXd& yTrue,
                                                    const Eigen::VectorXd& yPred, int numClasses);

MetricSummary aggregate(const std::vector<double>& perFoldTrain,
                        const std::vector<double>& perFoldTest, const std::string& metricName);

/// Ratio of the mean train error to the mean test error, on a log scale:
///   lor = log_base(train_mean / test_mean)
/// 0 means train and test errors match; negative values indicate
/// overfitting, positive values underfitting.
double lor(double trainMean, double testMean, double logBase = 10.0);

LorClass classifyLor(double lorValue, double epsilonIdeal);

/// Weighted blend of the error-mean ratio and the fold-dispersion ratio:
///   cos = alpha * train_mean/test_mean + beta * train_std/test_std
/// 1 is the optimum (matching errors, stable dispersion).
double cosRatio(double trainMean, double testMean, double trainStd, double testStd, double alpha,
                double beta);

CosClass classifyCos(double cosValue, double epsilonIdeal);

OverfitDiagnostics diagnostics(const MetricSummary& summary, const DiagnosticsConfig& config);

// Scalar metric catalog used in plans, fold CSVs and report columns.
const std::vector<std::string>& regressionMetricNames();
const std::vector<std::string>& classificationMetricNames();
bool metricCompatible(const std::string& metricName, TaskKind task);

// NaN marks an undefined value (r2 on a constant or single-sample fold).
double computeMetric(const std::string& metricName, const Eigen::VectorXd& yTrue,
                     const Eigen::VectorXd& yPred, int numClasses);

}  // namespace baselab
