#include "baselab/learners.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "learners_internal.hpp"

namespace baselab {

using nlohmann::json;

const char* modelTypeName(ModelType type) {
  switch (type) {
    case ModelType::Constant: return "constant";
    case ModelType::LinearRegression: return "linear_regression";
    case ModelType::RidgeRegression: return "ridge_regression";
    case ModelType::LogisticRegression: return "logistic_regression";
    case ModelType::Knn: return "knn";
    case ModelType::DecisionTree: return "decision_tree";
    case ModelType::RandomForest: return "random_forest";
    case ModelType::Mlp: return "mlp";
  }
  return "unknown";
}

ModelType parseModelType(const std::string& name) {
  if (name == "constant") return ModelType::Constant;
  if (name == "linear_regression") return ModelType::LinearRegression;
  if (name == "ridge_regression") return ModelType::RidgeRegression;
  if (name == "logistic_regression") return ModelType::LogisticRegression;
  if (name == "knn") return ModelType::Knn;
  if (name == "decision_tree") return ModelType::DecisionTree;
  if (name == "random_forest") return ModelType::RandomForest;
  if (name == "mlp") return ModelType::Mlp;
  raise(ErrorKind::InvalidArgument, "unknown model type '" + name + "'");
}

bool modelSupportsTask(ModelType type, TaskKind task) {
  switch (type) {
    case ModelType::LinearRegression:
    case ModelType::RidgeRegression:
      return task == TaskKind::Regression;
    case ModelType::LogisticRegression:
      return task == TaskKind::Classification;
    default:
      return true;
  }
}

const std::map<std::string, double>& hyperparameterDefaults(ModelType type) {
  static const std::map<ModelType, std::map<std::string, double>> table = {
      {ModelType::Constant, {}},
      {ModelType::LinearRegression, {}},
      {ModelType::RidgeRegression, {{"alpha", 1.0}}},
      {ModelType::LogisticRegression,
       {{"learning_rate", 0.1}, {"max_iter", 2000.0}, {"tol", 1e-7}}},
      {ModelType::Knn, {{"k", 5.0}}},
      {ModelType::DecisionTree, {{"max_depth", 0.0}, {"min_samples_leaf", 1.0}}},
      {ModelType::RandomForest,
       {{"n_trees", 50.0},
        {"max_features", 0.0},
        {"bootstrap", 1.0},
        {"max_depth", 0.0},
        {"min_samples_leaf", 1.0}}},
      {ModelType::Mlp,
       {{"hidden_units", 16.0},
        {"learning_rate", 0.05},
        {"max_epochs", 200.0},
        {"patience", 10.0},
        {"min_delta", 1e-6},
        {"validation_fraction", 0.2}}},
  };
  return table.at(type);
}

namespace {

bool isWhole(double v) { return std::isfinite(v) && v == std::floor(v); }

void checkInt(std::vector<std::string>& problems, const std::map<std::string, double>& hp,
              const std::string& name, double minValue) {
  auto it = hp.find(name);
  if (it == hp.end()) return;
  if (!isWhole(it->second) || it->second < minValue) {
    problems.push_back("hyperparameter '" + name + "' must be an integer >= " +
                       shortestRepr(minValue) + ", got " + shortestRepr(it->second));
  }
}

void checkPositive(std::vector<std::string>& problems, const std::map<std::string, double>& hp,
                   const std::string& name) {
  auto it = hp.find(name);
  if (it == hp.end()) return;
  if (!(it->second > 0.0)) {
    problems.push_back("hyperparameter '" + name + "' must be positive, got " +
                       shortestRepr(it->second));
  }
}

}  // namespace

std::vector<std::string> validateLearnerSpec(const LearnerSpec& spec) {
  std::vector<std::string> problems;
  if (!modelSupportsTask(spec.modelType, spec.taskKind)) {
    problems.push_back(std::string("model '") + modelTypeName(spec.modelType) +
                       "' does not support task '" + taskName(spec.taskKind) + "'");
  }
  const auto& defaults = hyperparameterDefaults(spec.modelType);
  for (const auto& [name, value] : spec.hyperparameters) {
    if (defaults.find(name) == defaults.end()) {
      problems.push_back(std::string("unknown hyperparameter '") + name + "' for model '" +
                         modelTypeName(spec.modelType) + "'");
    }
    if (!std::isfinite(value)) {
      problems.push_back("hyperparameter '" + name + "' is not finite");
    }
  }
  const auto& hp = spec.hyperparameters;
  switch (spec.modelType) {
    case ModelType::RidgeRegression:
      if (auto it = hp.find("alpha"); it != hp.end() && !(it->second >= 0.0)) {
        problems.push_back("hyperparameter 'alpha' must be >= 0");
      }
      break;
    case ModelType::LogisticRegression:
      checkPositive(problems, hp, "learning_rate");
      checkInt(problems, hp, "max_iter", 1.0);
      if (auto it = hp.find("tol"); it != hp.end() && !(it->second >= 0.0)) {
        problems.push_back("hyperparameter 'tol' must be >= 0");
      }
      break;
    case ModelType::Knn:
      checkInt(problems, hp, "k", 1.0);
      break;
    case ModelType::DecisionTree:
      checkInt(problems, hp, "max_depth", 0.0);
      checkInt(problems, hp, "min_samples_leaf", 1.0);
      break;
    case ModelType::RandomForest:
      checkInt(problems, hp, "n_trees", 1.0);
      checkInt(problems, hp, "max_features", 0.0);
      checkInt(problems, hp, "max_depth", 0.0);
      checkInt(problems, hp, "min_samples_leaf", 1.0);
      if (auto it = hp.find("bootstrap");
          it != hp.end() && it->second != 0.0 && it->second != 1.0) {
        problems.push_back("hyperparameter 'bootstrap' must be 0 or 1");
      }
      break;
    case ModelType::Mlp:
      checkInt(problems, hp, "hidden_units", 1.0);
      checkPositive(problems, hp, "learning_rate");
      checkInt(problems, hp, "max_epochs", 1.0);
      checkInt(problems, hp, "patience", 1.0);
      if (auto it = hp.find("min_delta"); it != hp.end() && !(it->second >= 0.0)) {
        problems.push_back("hyperparameter 'min_delta' must be >= 0");
      }
      if (auto it = hp.find("validation_fraction");
          it != hp.end() && !(it->second > 0.0 && it->second < 1.0)) {
        problems.push_back("hyperparameter 'validation_fraction' must lie in (0, 1)");
      }
      break;
    default:
      break;
  }
  return problems;
}

namespace detail {

Eigen::MatrixXd ModelCore::predictProba(const Eigen::MatrixXd&, int) const {
  raise(ErrorKind::UnsupportedForModel, "model does not define class probabilities");
}

int inferNumClasses(const Eigen::VectorXd& y) {
  long long maxLabel = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = y[i];
    if (!std::isfinite(v) || v != std::floor(v) || v < 0.0) {
      raise(ErrorKind::LabelOutOfRange,
            "classification target must hold non-negative integers, got " + shortestRepr(v));
    }
    maxLabel = std::max(maxLabel, std::llround(v));
  }
  return static_cast<int>(maxLabel) + 1;
}

namespace {

class ConstantCore final : public ModelCore {
 public:
  ConstantCore(TaskKind task, double value, std::vector<double> priors)
      : task_(task), value_(value), priors_(std::move(priors)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X, int) const override {
    return Eigen::VectorXd::Constant(X.rows(), value_);
  }

  Eigen::MatrixXd predictProba(const Eigen::MatrixXd& X, int threads) const override {
    if (task_ != TaskKind::Classification) return ModelCore::predictProba(X, threads);
    Eigen::MatrixXd proba(X.rows(), priors_.size());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (std::size_t c = 0; c < priors_.size(); ++c) proba(i, c) = priors_[c];
    }
    return proba;
  }

  std::string parametersJson() const override {
    json j = {{"model", "constant"}, {"value", value_}};
    if (!priors_.empty()) j["class_priors"] = priors_;
    return j.dump();
  }

  int numClasses() const override { return static_cast<int>(priors_.size()); }

 private:
  TaskKind task_;
  double value_;
  std::vector<double> priors_;
};

class LinearCore final : public ModelCore {
 public:
  LinearCore(double intercept, Eigen::VectorXd coefficients)
      : intercept_(intercept), coefficients_(std::move(coefficients)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X, int) const override {
    return (X * coefficients_).array() + intercept_;
  }

  std::string parametersJson() const override {
    std::vector<double> coefs(coefficients_.data(), coefficients_.data() + coefficients_.size());
    return json{{"model", "linear"}, {"intercept", intercept_}, {"coefficients", coefs}}.dump();
  }

 private:
  double intercept_;
  Eigen::VectorXd coefficients_;
};

class KnnCore final : public ModelCore {
 public:
  KnnCore(TaskKind task, int k, int numClasses, Eigen::MatrixXd X, Eigen::VectorXd y)
      : task_(task), k_(k), numClasses_(numClasses), trainX_(std::move(X)), trainY_(std::move(y)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X, int threads) const override {
    Eigen::VectorXd out(X.rows());
    const int n = static_cast<int>(X.rows());
    if (threads > 1) {
#pragma omp parallel for num_threads(threads) schedule(static)
      for (int i = 0; i < n; ++i) out[i] = predictOne(X, i);
    } else {
      for (int i = 0; i < n; ++i) out[i] = predictOne(X, i);
    }
    return out;
  }

  Eigen::MatrixXd predictProba(const Eigen::MatrixXd& X, int threads) const override {
    if (task_ != TaskKind::Classification) return ModelCore::predictProba(X, threads);
    Eigen::MatrixXd proba = Eigen::MatrixXd::Zero(X.rows(), numClasses_);
    const int n = static_cast<int>(X.rows());
    if (threads > 1) {
#pragma omp parallel for num_threads(threads) schedule(static)
      for (int i = 0; i < n; ++i) fillProbaRow(X, i, proba);
    } else {
      for (int i = 0; i < n; ++i) fillProbaRow(X, i, proba);
    }
    return proba;
  }

  std::string parametersJson() const override {
    return json{{"model", "knn"}, {"k", k_}, {"stored_rows", trainX_.rows()}}.dump();
  }

  int numClasses() const override { return numClasses_; }

 private:
  std::vector<int> neighbors(const Eigen::MatrixXd& X, int row) const {
    const int n = static_cast<int>(trainX_.rows());
    std::vector<std::pair<double, int>> dist(n);
    for (int j = 0; j < n; ++j) {
      dist[j] = {(trainX_.row(j) - X.row(row)).squaredNorm(), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());
    std::vector<int> picked(k_);
    for (int j = 0; j < k_; ++j) picked[j] = dist[j].second;
    return picked;
  }

  double predictOne(const Eigen::MatrixXd& X, int row) const {
    const auto picked = neighbors(X, row);
    if (task_ == TaskKind::Regression) {
      double sum = 0.0;
      for (int j : picked) sum += trainY_[j];
      return sum / static_cast<double>(k_);
    }
    std::vector<int> votes(numClasses_, 0);
    for (int j : picked) ++votes[static_cast<int>(std::llround(trainY_[j]))];
    int majority = 0;
    for (int c = 1; c < numClasses_; ++c) {
      if (votes[c] > votes[majority]) majority = c;
    }
    return majority;
  }

  void fillProbaRow(const Eigen::MatrixXd& X, int row, Eigen::MatrixXd& proba) const {
    const auto picked = neighbors(X, row);
    for (int j : picked) {
      proba(row, static_cast<int>(std::llround(trainY_[j]))) += 1.0 / static_cast<double>(k_);
    }
  }

  TaskKind task_;
  int k_;
  int numClasses_;
  Eigen::MatrixXd trainX_;
  Eigen::VectorXd trainY_;
};

}  // namespace

FitOutput fitConstant(const LearnerSpec& spec, const Eigen::MatrixXd&, const Eigen::VectorXd& y) {
  FitOutput out;
  if (spec.taskKind == TaskKind::Regression) {
    out.core = std::make_shared<ConstantCore>(spec.taskKind, y.mean(), std::vector<double>{});
    return out;
  }
  const int numClasses = inferNumClasses(y);
  std::vector<long long> counts(numClasses, 0);
  for (Eigen::Index i = 0; i < y.size(); ++i) ++counts[static_cast<int>(std::llround(y[i]))];
  int majority = 0;
  for (int c = 1; c < numClasses; ++c) {
    if (counts[c] > counts[majority]) majority = c;
  }
  std::vector<double> priors(numClasses);
  for (int c = 0; c < numClasses; ++c) {
    priors[c] = static_cast<double>(counts[c]) / static_cast<double>(y.size());
  }
  out.core = std::make_shared<ConstantCore>(spec.taskKind, majority, std::move(priors));
  return out;
}

FitOutput fitLinear(const LearnerSpec&, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Eigen::MatrixXd design(X.rows(), X.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(X.cols()) = X;
  // Rank-revealing orthogonal decomposition; exactly collinear systems get
  // the minimum-norm solution plus a warning flag.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  const Eigen::VectorXd beta = cod.solve(y);
  FitOutput out;
  out.minNormFallback = cod.rank() < design.cols();
  out.core = std::make_shared<LinearCore>(beta[0], beta.tail(X.cols()));
  return out;
}

FitOutput fitRidge(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const HyperReader hp(spec);
  const double alpha = hp.get("alpha");
  const Eigen::RowVectorXd featureMeans = X.colwise().mean();
  const double targetMean = y.mean();
  const Eigen::MatrixXd centered = X.rowwise() - featureMeans;
  const Eigen::VectorXd centeredY = y.array() - targetMean;
  Eigen::MatrixXd gram = centered.transpose() * centered;
  gram.diagonal().array() += alpha;
  const Eigen::VectorXd coefs = gram.ldlt().solve(centered.transpose() * centeredY);
  const double intercept = targetMean - featureMeans.dot(coefs);
  FitOutput out;
  out.core = std::make_shared<LinearCore>(intercept, coefs);
  return out;
}

FitOutput fitKnn(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const HyperReader hp(spec);
  const int k = hp.getInt("k");
  if (k > X.rows()) {
    raise(ErrorKind::InsufficientData, "knn requires k <= n training rows, got k=" +
                                           std::to_string(k) + " with n=" +
                                           std::to_string(X.rows()));
  }
  const int numClasses = spec.taskKind == TaskKind::Classification ? inferNumClasses(y) : 0;
  FitOutput out;
  out.core = std::make_shared<KnnCore>(spec.taskKind, k, numClasses, X, y);
  return out;
}

}  // namespace detail

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& features, int threads) const {
  if (!core_) raise(ErrorKind::InvalidArgument, "predict on an unfitted model");
  if (features.cols() != trainedFeatures_) {
    raise(ErrorKind::DimensionMismatch, "model trained on " + std::to_string(trainedFeatures_) +
                                            " features, got " + std::to_string(features.cols()));
  }
  return core_->predict(features, threads);
}

Eigen::MatrixXd FittedModel::predictProba(const Eigen::MatrixXd& features, int threads) const {
  if (!core_) raise(ErrorKind::InvalidArgument, "predict_proba on an unfitted model");
  if (features.cols() != trainedFeatures_) {
    raise(ErrorKind::DimensionMismatch, "model trained on " + std::to_string(trainedFeatures_) +
                                            " features, got " + std::to_string(features.cols()));
  }
  if (spec_.taskKind != TaskKind::Classification) {
    raise(ErrorKind::UnsupportedForModel, "probabilities are defined for classification only");
  }
  return core_->predictProba(features, threads);
}

std::string FittedModel::parametersJson() const {
  if (!core_) raise(ErrorKind::InvalidArgument, "parameters of an unfitted model");
  return core_->parametersJson();
}

int FittedModel::numClasses() const { return core_ ? core_->numClasses() : 0; }

FittedModel fit(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                const Eigen::VectorXd& target, int threads) {
  const auto problems = validateLearnerSpec(spec);
  if (!problems.empty()) {
    std::string joined;
    for (const auto& p : problems) {
      if (!joined.empty()) joined += "; ";
      joined += p;
    }
    raise(ErrorKind::InvalidHyperparameter, joined);
  }
  if (features.rows() < 1) raise(ErrorKind::InsufficientData, "no training rows");
  if (features.cols() < 1) raise(ErrorKind::InsufficientData, "no feature columns");
  if (features.rows() != target.size()) {
    raise(ErrorKind::DimensionMismatch, "feature rows and target length differ");
  }
  if (spec.taskKind == TaskKind::Classification && spec.modelType != ModelType::Constant) {
    std::set<long long> distinct;
    for (Eigen::Index i = 0; i < target.size(); ++i) distinct.insert(std::llround(target[i]));
    if (distinct.size() < 2) {
      raise(ErrorKind::InsufficientData, "classification needs at least 2 distinct classes");
    }
  }

  detail::FitOutput fitted;
  switch (spec.modelType) {
    case ModelType::Constant: fitted = detail::fitConstant(spec, features, target); break;
    case ModelType::LinearRegression: fitted = detail::fitLinear(spec, features, target); break;
    case ModelType::RidgeRegression: fitted = detail::fitRidge(spec, features, target); break;
    case ModelType::LogisticRegression: fitted = detail::fitLogistic(spec, features, target); break;
    case ModelType::Knn: fitted = detail::fitKnn(spec, features, target); break;
    case ModelType::DecisionTree: fitted = detail::fitTree(spec, features, target); break;
    case ModelType::RandomForest: fitted = detail::fitForest(spec, features, target, threads); break;
    case ModelType::Mlp: fitted = detail::fitMlp(spec, features, target); break;
  }

  FittedModel model;
  model.spec_ = spec;
  model.core_ = std::move(fitted.core);
  model.trace_ = std::move(fitted.trace);
  model.minNormFallback_ = fitted.minNormFallback;
  model.trainedFeatures_ = static_cast<int>(features.cols());
  return model;
}

}  // namespace baselab
