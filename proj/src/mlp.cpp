#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "learners_internal.hpp"

namespace baselab::detail {

using nlohmann::json;

namespace {

struct Unpacked {
  Eigen::MatrixXd w1;  // hidden x inputs
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // outputs x hidden
  Eigen::VectorXd b2;
};

Unpacked unpack(const Eigen::VectorXd& params, const MlpShape& shape) {
  Unpacked u;
  u.w1.resize(shape.hidden, shape.inputs);
  u.b1.resize(shape.hidden);
  u.w2.resize(shape.outputs, shape.hidden);
  u.b2.resize(shape.outputs);
  int pos = 0;
  for (int i = 0; i < shape.hidden; ++i) {
    for (int j = 0; j < shape.inputs; ++j) u.w1(i, j) = params[pos++];
  }
  for (int i = 0; i < shape.hidden; ++i) u.b1[i] = params[pos++];
  for (int i = 0; i < shape.outputs; ++i) {
    for (int j = 0; j < shape.hidden; ++j) u.w2(i, j) = params[pos++];
  }
  for (int i = 0; i < shape.outputs; ++i) u.b2[i] = params[pos++];
  return u;
}

Eigen::VectorXd pack(const Unpacked& u, const MlpShape& shape) {
  Eigen::VectorXd params(shape.parameterCount());
  int pos = 0;
  for (int i = 0; i < shape.hidden; ++i) {
    for (int j = 0; j < shape.inputs; ++j) params[pos++] = u.w1(i, j);
  }
  for (int i = 0; i < shape.hidden; ++i) params[pos++] = u.b1[i];
  for (int i = 0; i < shape.outputs; ++i) {
    for (int j = 0; j < shape.hidden; ++j) params[pos++] = u.w2(i, j);
  }
  for (int i = 0; i < shape.outputs; ++i) params[pos++] = u.b2[i];
  return params;
}

struct Forward {
  Eigen::MatrixXd hidden;  // n x hidden, tanh activations
  Eigen::MatrixXd output;  // n x outputs, pre-softmax logits / identity
};

Forward forwardPass(const Unpacked& u, const Eigen::MatrixXd& X) {
  Forward f;
  f.hidden = ((X * u.w1.transpose()).rowwise() + u.b1.transpose()).array().tanh();
  f.output = (f.hidden * u.w2.transpose()).rowwise() + u.b2.transpose();
  return f;
}

// Row-wise log softmax, numerically shifted by the row max.
Eigen::MatrixXd logSoftmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double maxv = logits.row(i).maxCoeff();
    const double lse = std::log((logits.row(i).array() - maxv).exp().sum()) + maxv;
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

class MlpCore final : public ModelCore {
 public:
  MlpCore(MlpShape shape, Eigen::VectorXd params, int numClasses)
      : shape_(shape), weights_(unpack(params, shape)), numClasses_(numClasses) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X, int) const override {
    const Forward f = forwardPass(weights_, X);
    if (shape_.task == TaskKind::Regression) return f.output.col(0);
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      int best = 0;
      for (int c = 1; c < shape_.outputs; ++c) {
        if (f.output(i, c) > f.output(i, best)) best = c;
      }
      out[i] = best;
    }
    return out;
  }

  Eigen::MatrixXd predictProba(const Eigen::MatrixXd& X, int threads) const override {
    if (shape_.task != TaskKind::Classification) return ModelCore::predictProba(X, threads);
    const Forward f = forwardPass(weights_, X);
    Eigen::MatrixXd proba = logSoftmax(f.output).array().exp();
    for (Eigen::Index i = 0; i < proba.rows(); ++i) proba.row(i) /= proba.row(i).sum();
    return proba;
  }

  std::string parametersJson() const override {
    return json{{"model", "mlp"},
                {"inputs", shape_.inputs},
                {"hidden_units", shape_.hidden},
                {"outputs", shape_.outputs}}
        .dump();
  }

  int numClasses() const override { return numClasses_; }

 private:
  MlpShape shape_;
  Unpacked weights_;
  int numClasses_;
};

}  // namespace

double mlpLoss(const Eigen::VectorXd& params, const MlpShape& shape, const Eigen::MatrixXd& inputs,
               const Eigen::MatrixXd& targets) {
  const Unpacked u = unpack(params, shape);
  const Forward f = forwardPass(u, inputs);
  const double n = static_cast<double>(inputs.rows());
  if (shape.task == TaskKind::Regression) {
    return 0.5 * (f.output - targets).squaredNorm() / n;
  }
  return -(targets.array() * logSoftmax(f.output).array()).sum() / n;
}

Eigen::VectorXd mlpGrad(const Eigen::VectorXd& params, const MlpShape& shape,
                        const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
  const Unpacked u = unpack(params, shape);
  const Forward f = forwardPass(u, inputs);
  const double n = static_cast<double>(inputs.rows());

  Eigen::MatrixXd dOutput;
  if (shape.task == TaskKind::Regression) {
    dOutput = (f.output - targets) / n;
  } else {
    dOutput = (logSoftmax(f.output).array().exp().matrix() - targets) / n;
  }
  const Eigen::MatrixXd dHidden =
      (dOutput * u.w2).array() * (1.0 - f.hidden.array().square());

  Unpacked g;
  g.w2 = dOutput.transpose() * f.hidden;
  g.b2 = dOutput.colwise().sum();
  g.w1 = dHidden.transpose() * inputs;
  g.b1 = dHidden.colwise().sum();
  return pack(g, shape);
}

FitOutput fitMlp(const LearnerSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const HyperReader hp(spec);
  const int hiddenUnits = hp.getInt("hidden_units");
  const double learningRate = hp.get("learning_rate");
  const int maxEpochs = hp.getInt("max_epochs");
  const int patience = hp.getInt("patience");
  const double minDelta = hp.get("min_delta");
  const double validationFraction = hp.get("validation_fraction");

  MlpShape shape;
  shape.inputs = static_cast<int>(X.cols());
  shape.hidden = hiddenUnits;
  shape.task = spec.taskKind;
  int numClasses = 0;
  if (spec.taskKind == TaskKind::Classification) {
    numClasses = inferNumClasses(y);
    shape.outputs = numClasses;
  } else {
    shape.outputs = 1;
  }

  const int n = static_cast<int>(X.rows());
  Eigen::MatrixXd targets(n, shape.outputs);
  if (spec.taskKind == TaskKind::Regression) {
    targets.col(0) = y;
  } else {
    targets.setZero();
    for (int i = 0; i < n; ++i) targets(i, static_cast<int>(std::llround(y[i]))) = 1.0;
  }

  // Internal validation split of the training rows, seeded.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng splitRng(mixSeed(spec.seed, 2));
  splitRng.shuffle(order);
  int valCount = std::max(1, static_cast<int>(std::floor(validationFraction * n)));
  if (valCount >= n) valCount = n - 1;
  Eigen::MatrixXd trainX;
  Eigen::MatrixXd trainT;
  Eigen::MatrixXd valX;
  Eigen::MatrixXd valT;
  if (valCount < 1) {
    trainX = valX = X;
    trainT = valT = targets;
  } else {
    const int trainCount = n - valCount;
    trainX.resize(trainCount, X.cols());
    trainT.resize(trainCount, shape.outputs);
    valX.resize(valCount, X.cols());
    valT.resize(valCount, shape.outputs);
    for (int i = 0; i < valCount; ++i) {
      valX.row(i) = X.row(order[i]);
      valT.row(i) = targets.row(order[i]);
    }
    for (int i = 0; i < trainCount; ++i) {
      trainX.row(i) = X.row(order[valCount + i]);
      trainT.row(i) = targets.row(order[valCount + i]);
    }
  }

  // Weights start uniform in +-1/sqrt(fan_in); biases start at zero.
  Eigen::VectorXd params = Eigen::VectorXd::Zero(shape.parameterCount());
  Rng initRng(mixSeed(spec.seed, 1));
  const double w1Bound = 1.0 / std::sqrt(static_cast<double>(shape.inputs));
  const double w2Bound = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  int pos = 0;
  for (int i = 0; i < shape.hidden * shape.inputs; ++i) {
    params[pos++] = initRng.uniform(-w1Bound, w1Bound);
  }
  pos += shape.hidden;
  for (int i = 0; i < shape.outputs * shape.hidden; ++i) {
    params[pos++] = initRng.uniform(-w2Bound, w2Bound);
  }

  TrainingTrace trace;
  Eigen::VectorXd bestParams = params;
  double bestValLoss = std::numeric_limits<double>::infinity();
  double patienceBaseline = std::numeric_limits<double>::infinity();
  int sinceImprovement = 0;
  trace.stopReason = TrainingTrace::StopReason::MaxEpochs;

  for (int epoch = 0; epoch < maxEpochs; ++epoch) {
    params -= learningRate * mlpGrad(params, shape, trainX, trainT);
    const double trainLoss = mlpLoss(params, shape, trainX, trainT);
    const double valLoss = mlpLoss(params, shape, valX, valT);
    trace.trainLoss.push_back(trainLoss);
    trace.validationLoss.push_back(valLoss);

    if (valLoss < bestValLoss) {
      bestValLoss = valLoss;
      bestParams = params;
    }
    if (valLoss < patienceBaseline - minDelta) {
      patienceBaseline = valLoss;
      sinceImprovement = 0;
    } else {
      ++sinceImprovement;
      if (sinceImprovement >= patience) {
        trace.stopReason = TrainingTrace::StopReason::EarlyStopping;
        break;
      }
    }
  }
  trace.stoppedEpoch = static_cast<int>(trace.trainLoss.size());

  FitOutput out;
  out.trace = std::move(trace);
  out.core = std::make_shared<MlpCore>(shape, bestParams, numClasses);
  return out;
}

}  // namespace baselab::detail
