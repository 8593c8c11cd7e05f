#pragma once

#include "baselab/learners.hpp"

namespace baselab::detail {

// Reads hyperparameters with defaults merged in; unknown names were already
// rejected by validateLearnerSpec.
class HyperReader {
 public:
  explicit HyperReader(const LearnerSpec& spec) : values_(hyperparameterDefaults(spec.modelType)) {
    for (const auto& [name, value] : spec.hyperparameters) values_[name] = value;
  }

  double get(const std::string& name) const { return values_.at(name); }
  int getInt(const std::string& name) const { return static_cast<int>(values_.at(name)); }

 private:
  std::map<std::string, double> values_;
};

FitOutput fitConstant(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
FitOutput fitLinear(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
FitOutput fitRidge(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
FitOutput fitKnn(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
FitOutput fitLogistic(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
FitOutput fitTree(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
FitOutput fitForest(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    int threads);
FitOutput fitMlp(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

int inferNumClasses(const Eigen::VectorXd& y);

}  // namespace baselab::detail
