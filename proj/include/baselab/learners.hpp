#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "baselab/common.hpp"

namespace baselab {

enum class ModelType {
  Constant,
  LinearRegression,
  RidgeRegression,
  LogisticRegression,
  Knn,
  DecisionTree,
  RandomForest,
  Mlp,
};

const char* modelTypeName(ModelType type);
ModelType parseModelType(const std::string& name);
bool modelSupportsTask(ModelType type, TaskKind task);
const std::map<std::string, double>& hyperparameterDefaults(ModelType type);

// One model instance: a model type plus a concrete hyperparameter
// assignment and a seed. Identical specs on identical data refit to
// identical parameters.
struct LearnerSpec {
  ModelType modelType = ModelType::Constant;
  TaskKind taskKind = TaskKind::Regression;
  std::map<std::string, double> hyperparameters;
  std::uint64_t seed = 0;
};

// Returns human-readable problems; empty means the spec is valid.
std::vector<std::string> validateLearnerSpec(const LearnerSpec& spec);

struct TrainingTrace {
  std::vector<double> trainLoss;
  std::vector<double> validationLoss;
  int stoppedEpoch = 0;
  enum class StopReason { MaxEpochs, EarlyStopping } stopReason = StopReason::MaxEpochs;
};

namespace detail {

class ModelCore {
 public:
  virtual ~ModelCore() = default;
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& features, int threads) const = 0;
  virtual Eigen::MatrixXd predictProba(const Eigen::MatrixXd& features, int threads) const;
  virtual std::string parametersJson() const = 0;
  virtual int numClasses() const { return 0; }
};

struct FitOutput {
  std::shared_ptr<const ModelCore> core;
  std::optional<TrainingTrace> trace;
  bool minNormFallback = false;
};

}  // namespace detail

class FittedModel {
 public:
  FittedModel() = default;

  const LearnerSpec& spec() const { return spec_; }
  Eigen::VectorXd predict(const Eigen::MatrixXd& features, int threads = 1) const;
  Eigen::MatrixXd predictProba(const Eigen::MatrixXd& features, int threads = 1) const;
  const std::optional<TrainingTrace>& trace() const { return trace_; }
  // Set when an exactly collinear least-squares system was resolved with
  // the minimum-norm solution instead of failing.
  bool minNormFallback() const { return minNormFallback_; }
  std::string parametersJson() const;
  int numClasses() const;

 private:
  friend FittedModel fit(const LearnerSpec&, const Eigen::MatrixXd&, const Eigen::VectorXd&, int);
  LearnerSpec spec_;
  std::shared_ptr<const detail::ModelCore> core_;
  std::optional<TrainingTrace> trace_;
  bool minNormFallback_ = false;
  int trainedFeatures_ = 0;
};

FittedModel fit(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                const Eigen::VectorXd& target, int threads = 1);

namespace detail {

// Negative binary log-likelihood (mean) and its gradient for a design
// matrix that already carries the intercept column. The trainer descends
// exactly this function; tests difference it numerically.
double logisticNll(const Eigen::VectorXd& weights, const Eigen::MatrixXd& design,
                   const Eigen::VectorXd& targets01);
Eigen::VectorXd logisticNllGrad(const Eigen::VectorXd& weights, const Eigen::MatrixXd& design,
                                const Eigen::VectorXd& targets01);

struct MlpShape {
  int inputs = 0;
  int hidden = 0;
  int outputs = 0;
  TaskKind task = TaskKind::Regression;
  int parameterCount() const { return hidden * inputs + hidden + outputs * hidden + outputs; }
};

// Flat parameter layout: W1 row-major, b1, W2 row-major, b2.
double mlpLoss(const Eigen::VectorXd& params, const MlpShape& shape, const Eigen::MatrixXd& inputs,
               const Eigen::MatrixXd& targets);
Eigen::VectorXd mlpGrad(const Eigen::VectorXd& params, const MlpShape& shape,
                        const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

}  // namespace detail

}  // namespace baselab
