#include "baselab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace baselab {

namespace {

void checkPair(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred) {
  if (yTrue.size() != yPred.size()) {
    raise(ErrorKind::LengthMismatch, "y_true has " + std::to_string(yTrue.size()) +
                                         " entries, y_pred has " + std::to_string(yPred.size()));
  }
  if (yTrue.size() == 0) raise(ErrorKind::EmptyInput, "empty metric input");
}

int labelOf(double value, int numClasses, const char* which) {
  const long long label = std::llround(value);
  if (label < 0 || label >= numClasses) {
    raise(ErrorKind::LabelOutOfRange, std::string(which) + " label " + std::to_string(label) +
                                          " outside [0, " + std::to_string(numClasses) + ")");
  }
  return static_cast<int>(label);
}

double sampleStd(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

const char* lorClassName(LorClass c) {
  switch (c) {
    case LorClass::Ideal: return "ideal";
    case LorClass::Overfitting: return "overfitting";
    case LorClass::Underfitting: return "underfitting";
    case LorClass::Undefined: return "undefined";
  }
  return "undefined";
}

const char* cosClassName(CosClass c) {
  switch (c) {
    case CosClass::Optimal: return "optimal";
    case CosClass::Overfitting: return "overfitting";
    case CosClass::Underfitting: return "underfitting";
    case CosClass::Undefined: return "undefined";
  }
  return "undefined";
}

const char* undefinedReasonName(UndefinedReason r) {
  switch (r) {
    case UndefinedReason::ZeroTestMean: return "zero_test_mean";
    case UndefinedReason::ZeroTestStd: return "zero_test_std";
    case UndefinedReason::ZeroTrainMean: return "zero_train_mean";
  }
  return "unknown";
}

double mae(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred) {
  checkPair(yTrue, yPred);
  return (yTrue - yPred).cwiseAbs().mean();
}

double mse(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred) {
  checkPair(yTrue, yPred);
  return (yTrue - yPred).squaredNorm() / static_cast<double>(yTrue.size());
}

double rmse(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred) {
  return std::sqrt(mse(yTrue, yPred));
}

std::optional<double> rSquared(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred) {
  checkPair(yTrue, yPred);
  if (yTrue.size() < 2) return std::nullopt;
  const double mean = yTrue.mean();
  const double ssTot = (yTrue.array() - mean).square().sum();
  if (ssTot == 0.0) return std::nullopt;
  const double ssRes = (yTrue - yPred).squaredNorm();
  return 1.0 - ssRes / ssTot;
}

double accuracy(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred) {
  checkPair(yTrue, yPred);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < yTrue.size(); ++i) {
    if (std::llround(yTrue[i]) == std::llround(yPred[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(yTrue.size());
}

double f1Score(const Eigen::VectorXd& yTrue, const Eigen::VectorXd& yPred, F1Averaging averaging,
               int numClasses) {
  const auto cm = confusionMatrix(yTrue, yPred, numClasses);
  auto classF1 = [&](int c) {
    long long tp = cm[c][c];
    long long fp = 0;
    long long fn = 0;
    for (int i = 0; i < numClasses; ++i) {
      if (i == c) continue;
      fp += cm[i][c];
      fn += cm[c][i];
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    if (denom == 0.0) return 0.0;
    return 2.0 * static_cast<double>(tp) / denom;
  };
  if (averaging == F1Averaging::Binary) {
    if (numClasses < 2) raise(ErrorKind::InvalidArgument, "binary f1 needs at least 2 classes");
    return classF1(1);
  }
  double total = 0.0;
  for (int c = 0; c < numClasses; ++c) total += classF1(c);
  return total / static_cast<double>(numClasses);
}

std::vector<std::vector<long long>> confusionMatrix(const Eigen::VectorXd& yTrue,
                                                    const Eigen::VectorXd& yPred, int numClasses) {
  checkPair(yTrue, yPred);
  if (numClasses < 1) raise(ErrorKind::InvalidArgument, "numClasses must be positive");
  std::vector<std::vector<long long>> cm(numClasses, std::vector<long long>(numClasses, 0));
  for (Eigen::Index i = 0; i < yTrue.size(); ++i) {
    const int t = labelOf(yTrue[i], numClasses, "true");
    const int p = labelOf(yPred[i], numClasses, "predicted");
    ++cm[t][p];
  }
  return cm;
}

MetricSummary aggregate(const std::vector<double>& perFoldTrain,
                        const std::vector<double>& perFoldTest, const std::string& metricName) {
  if (perFoldTrain.size() != perFoldTest.size()) {
    raise(ErrorKind::LengthMismatch, "train and test fold lists differ in length");
  }
  if (perFoldTrain.empty()) raise(ErrorKind::EmptyInput, "no folds to aggregate");
  MetricSummary s;
  s.metricName = metricName;
  s.numFolds = static_cast<int>(perFoldTrain.size());
  s.perFoldTrain = perFoldTrain;
  s.perFoldTest = perFoldTest;
  double trainSum = 0.0;
  double testSum = 0.0;
  for (int i = 0; i < s.numFolds; ++i) {
    trainSum += perFoldTrain[i];
    testSum += perFoldTest[i];
  }
  s.trainMean = trainSum / s.numFolds;
  s.testMean = testSum / s.numFolds;
  s.trainStd = sampleStd(perFoldTrain, s.trainMean);
  s.testStd = sampleStd(perFoldTest, s.testMean);
  s.singleFoldWarning = s.numFolds == 1;
  return s;
}

double lor(double trainMean, double testMean, double logBase) {
  if (!(testMean > 0.0)) {
    raise(ErrorKind::UndefinedDiagnostic, "zero_test_mean: lor undefined for test mean " +
                                              shortestRepr(testMean));
  }
  if (!(trainMean > 0.0)) {
    raise(ErrorKind::UndefinedDiagnostic, "zero_train_mean: lor undefined for train mean " +
                                              shortestRepr(trainMean));
  }
  return std::log(trainMean / testMean) / std::log(logBase);
}

LorClass classifyLor(double lorValue, double epsilonIdeal) {
  if (std::abs(lorValue) <= epsilonIdeal) return LorClass::Ideal;
  return lorValue < 0.0 ? LorClass::Overfitting : LorClass::Underfitting;
}

double cosRatio(double trainMean, double testMean, double trainStd, double testStd, double alpha,
                double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    raise(ErrorKind::InvalidArgument, "cos weights must be positive");
  }
  if (!(testMean > 0.0)) {
    raise(ErrorKind::UndefinedDiagnostic, "zero_test_mean: cos undefined for test mean " +
                                              shortestRepr(testMean));
  }
  if (!(testStd > 0.0)) {
    raise(ErrorKind::UndefinedDiagnostic, "zero_test_std: cos undefined for test std " +
                                              shortestRepr(testStd));
  }
  return alpha * (trainMean / testMean) + beta * (trainStd / testStd);
}

CosClass classifyCos(double cosValue, double epsilonIdeal) {
  if (std::abs(cosValue - 1.0) <= epsilonIdeal) return CosClass::Optimal;
  return cosValue > 1.0 ? CosClass::Overfitting : CosClass::Underfitting;
}

OverfitDiagnostics diagnostics(const MetricSummary& summary, const DiagnosticsConfig& config) {
  OverfitDiagnostics d;
  d.alpha = config.alpha;
  d.beta = config.beta;
  const bool testMeanZero = !(summary.testMean > 0.0);
  const bool trainMeanZero = !(summary.trainMean > 0.0);
  const bool testStdZero = !(summary.testStd > 0.0);

  if (!testMeanZero && !trainMeanZero) {
    d.lor = lor(summary.trainMean, summary.testMean, config.logBase);
    d.lorClass = classifyLor(*d.lor, config.epsilonIdeal);
  }
  if (!testMeanZero && !trainMeanZero && !testStdZero) {
    d.cos = cosRatio(summary.trainMean, summary.testMean, summary.trainStd, summary.testStd,
                     config.alpha, config.beta);
    d.cosClass = classifyCos(*d.cos, config.epsilonIdeal);
    d.cosDeviation = *d.cos - 1.0;
  }
  if (testMeanZero) {
    d.undefinedReason = UndefinedReason::ZeroTestMean;
  } else if (trainMeanZero) {
    d.undefinedReason = UndefinedReason::ZeroTrainMean;
  } else if (testStdZero) {
    d.undefinedReason = UndefinedReason::ZeroTestStd;
  }
  return d;
}

const std::vector<std::string>& regressionMetricNames() {
  static const std::vector<std::string> names = {"mae", "mse", "rmse", "r2"};
  return names;
}

const std::vector<std::string>& classificationMetricNames() {
  static const std::vector<std::string> names = {"accuracy", "f1"};
  return names;
}

bool metricCompatible(const std::string& metricName, TaskKind task) {
  const auto& names =
      task == TaskKind::Regression ? regressionMetricNames() : classificationMetricNames();
  return std::find(names.begin(), names.end(), metricName) != names.end();
}

double computeMetric(const std::string& metricName, const Eigen::VectorXd& yTrue,
                     const Eigen::VectorXd& yPred, int numClasses) {
  if (metricName == "mae") return mae(yTrue, yPred);
  if (metricName == "mse") return mse(yTrue, yPred);
  if (metricName == "rmse") return rmse(yTrue, yPred);
  if (metricName == "r2") {
    const auto r2 = rSquared(yTrue, yPred);
    return r2 ? *r2 : std::numeric_limits<double>::quiet_NaN();
  }
  if (metricName == "accuracy") return accuracy(yTrue, yPred);
  if (metricName == "f1") {
    const auto averaging = numClasses <= 2 ? F1Averaging::Binary : F1Averaging::Macro;
    return f1Score(yTrue, yPred, averaging, numClasses);
  }
  raise(ErrorKind::InvalidArgument, "unknown metric '" + metricName + "'");
}

}  // namespace baselab
