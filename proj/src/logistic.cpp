#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "learners_internal.hpp"

namespace baselab::detail {

using nlohmann::json;

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::MatrixXd withIntercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd design(X.rows(), X.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(X.cols()) = X;
  return design;
}

Eigen::VectorXd descend(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets01,
                        double learningRate, int maxIter, double tol) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(design.cols());
  for (int iter = 0; iter < maxIter; ++iter) {
    const Eigen::VectorXd grad = logisticNllGrad(w, design, targets01);
    if (grad.cwiseAbs().maxCoeff() <= tol) break;
    w -= learningRate * grad;
  }
  return w;
}

class LogisticCore final : public ModelCore {
 public:
  LogisticCore(int numClasses, std::vector<int> classes, Eigen::MatrixXd weights)
      : numClasses_(numClasses), classes_(std::move(classes)), weights_(std::move(weights)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X, int threads) const override {
    const Eigen::MatrixXd proba = predictProba(X, threads);
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      int best = 0;
      for (int c = 1; c < numClasses_; ++c) {
        if (proba(i, c) > proba(i, best)) best = c;
      }
      out[i] = best;
    }
    return out;
  }

  Eigen::MatrixXd predictProba(const Eigen::MatrixXd& X, int) const override {
    const Eigen::MatrixXd design = withIntercept(X);
    Eigen::MatrixXd proba = Eigen::MatrixXd::Zero(X.rows(), numClasses_);
    if (classes_.size() == 2) {
      // Single binary model stored in row 0.
      const Eigen::VectorXd z = design * weights_.row(0).transpose();
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double p1 = sigmoid(z[i]);
        proba(i, classes_[1]) = p1;
        proba(i, classes_[0]) = 1.0 - p1;
      }
      return proba;
    }
    // One-vs-rest scores normalized per row.
    for (std::size_t m = 0; m < classes_.size(); ++m) {
      const Eigen::VectorXd z = design * weights_.row(m).transpose();
      for (Eigen::Index i = 0; i < X.rows(); ++i) proba(i, classes_[m]) = sigmoid(z[i]);
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double sum = proba.row(i).sum();
      if (sum > 0.0) {
        proba.row(i) /= sum;
      } else {
        for (std::size_t m = 0; m < classes_.size(); ++m) {
          proba(i, classes_[m]) = 1.0 / static_cast<double>(classes_.size());
        }
      }
    }
    return proba;
  }

  std::string parametersJson() const override {
    json models = json::array();
    for (std::size_t m = 0; m < classes_.size(); ++m) {
      std::vector<double> w(weights_.row(m).data(), weights_.row(m).data() + weights_.cols());
      models.push_back({{"class", classes_[m]}, {"weights", w}});
    }
    return json{{"model", "logistic_regression"}, {"per_class", models}}.dump();
  }

  int numClasses() const override { return numClasses_; }

 private:
  int numClasses_;
  std::vector<int> classes_;   // classes present in training order (ascending)
  Eigen::MatrixXd weights_;    // one row per entry of classes_ (binary: one row)
};

}  // namespace

double logisticNll(const Eigen::VectorXd& weights, const Eigen::MatrixXd& design,
                   const Eigen::VectorXd& targets01) {
  const Eigen::VectorXd z = design * weights;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] >= 0.0) {
      total += std::log1p(std::exp(-z[i])) + (1.0 - targets01[i]) * z[i];
    } else {
      total += std::log1p(std::exp(z[i])) - targets01[i] * z[i];
    }
  }
  return total / static_cast<double>(z.size());
}

Eigen::VectorXd logisticNllGrad(const Eigen::VectorXd& weights, const Eigen::MatrixXd& design,
                                const Eigen::VectorXd& targets01) {
  const Eigen::VectorXd z = design * weights;
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) residual[i] = sigmoid(z[i]) - targets01[i];
  return design.transpose() * residual / static_cast<double>(z.size());
}

FitOutput fitLogistic(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const HyperReader hp(spec);
  const double learningRate = hp.get("learning_rate");
  const int maxIter = hp.getInt("max_iter");
  const double tol = hp.get("tol");

  const int numClasses = inferNumClasses(y);
  std::set<int> present;
  for (Eigen::Index i = 0; i < y.size(); ++i) present.insert(static_cast<int>(std::llround(y[i])));
  const std::vector<int> classes(present.begin(), present.end());

  const Eigen::MatrixXd design = withIntercept(X);
  FitOutput out;
  if (classes.size() == 2) {
    Eigen::VectorXd targets(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      targets[i] = std::llround(y[i]) == classes[1] ? 1.0 : 0.0;
    }
    Eigen::MatrixXd weights(1, design.cols());
    weights.row(0) = descend(design, targets, learningRate, maxIter, tol).transpose();
    out.core = std::make_shared<LogisticCore>(numClasses, classes, std::move(weights));
    return out;
  }

  Eigen::MatrixXd weights(classes.size(), design.cols());
  for (std::size_t m = 0; m < classes.size(); ++m) {
    Eigen::VectorXd targets(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      targets[i] = std::llround(y[i]) == classes[m] ? 1.0 : 0.0;
    }
    weights.row(m) = descend(design, targets, learningRate, maxIter, tol).transpose();
  }
  out.core = std::make_shared<LogisticCore>(numClasses, classes, std::move(weights));
  return out;
}

}  // namespace baselab::detail
