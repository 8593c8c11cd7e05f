#include <algorithm>
#include <cmath>

#include "baselab/dataset.hpp"

namespace baselab {

namespace {

std::string paramKey(const char* stat, int feature) {
  return std::string(stat) + "_" + std::to_string(feature);
}

double requireParam(const TransformSpec& spec, const std::string& key) {
  auto it = spec.parameters.find(key);
  if (it == spec.parameters.end()) {
    raise(ErrorKind::DimensionMismatch, "transform parameter '" + key + "' missing");
  }
  return it->second;
}

// Least-squares line over (0, v0), (1, v1), ... for one row; the fitted line
// is subtracted in place.
void detrendRow(Eigen::MatrixXd& features, int row) {
  const int p = static_cast<int>(features.cols());
  if (p == 1) {
    features(row, 0) = 0.0;
    return;
  }
  const double n = static_cast<double>(p);
  const double xMean = (n - 1.0) / 2.0;
  double yMean = 0.0;
  for (int j = 0; j < p; ++j) yMean += features(row, j);
  yMean /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int j = 0; j < p; ++j) {
    const double dx = j - xMean;
    sxy += dx * (features(row, j) - yMean);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  const double intercept = yMean - slope * xMean;
  for (int j = 0; j < p; ++j) features(row, j) -= slope * j + intercept;
}

}  // namespace

TransformSpec fitTransform(const Eigen::MatrixXd& features, TransformKind kind,
                           TransformScope scope, const std::vector<int>* rowSubset) {
  const int n = static_cast<int>(features.rows());
  const int p = static_cast<int>(features.cols());
  std::vector<int> rows;
  if (rowSubset) {
    if (rowSubset->empty()) raise(ErrorKind::InvalidArgument, "empty row subset");
    for (int r : *rowSubset) {
      if (r < 0 || r >= n) {
        raise(ErrorKind::InvalidArgument, "row subset index " + std::to_string(r) +
                                              " outside [0, " + std::to_string(n) + ")");
      }
    }
    rows = *rowSubset;
  } else {
    rows.resize(n);
    for (int i = 0; i < n; ++i) rows[i] = i;
  }

  TransformSpec spec;
  spec.kind = kind;
  spec.scope = scope;
  spec.fitted = true;

  switch (kind) {
    case TransformKind::Identity:
      break;
    case TransformKind::LinearDetrend:
      // Fitted per application row; the spec only carries the policy marker.
      spec.parameters["per_row"] = 1.0;
      break;
    case TransformKind::MaxNormalize: {
      for (int j = 0; j < p; ++j) {
        double maxAbs = 0.0;
        for (int r : rows) maxAbs = std::max(maxAbs, std::abs(features(r, j)));
        if (maxAbs == 0.0) {
          raise(ErrorKind::DegenerateStatistic,
                "max_normalize: feature " + std::to_string(j) + " is all zero");
        }
        spec.parameters[paramKey("max_abs", j)] = maxAbs;
      }
      break;
    }
    case TransformKind::MinMax: {
      for (int j = 0; j < p; ++j) {
        double lo = features(rows[0], j);
        double hi = lo;
        for (int r : rows) {
          lo = std::min(lo, features(r, j));
          hi = std::max(hi, features(r, j));
        }
        if (lo == hi) {
          raise(ErrorKind::DegenerateStatistic,
                "min_max: feature " + std::to_string(j) + " is constant");
        }
        spec.parameters[paramKey("min", j)] = lo;
        spec.parameters[paramKey("max", j)] = hi;
      }
      break;
    }
    case TransformKind::ZScore: {
      for (int j = 0; j < p; ++j) {
        double sum = 0.0;
        for (int r : rows) sum += features(r, j);
        const double mean = sum / static_cast<double>(rows.size());
        double ss = 0.0;
        for (int r : rows) {
          const double d = features(r, j) - mean;
          ss += d * d;
        }
        const double std = std::sqrt(ss / static_cast<double>(rows.size()));
        if (std == 0.0) {
          raise(ErrorKind::DegenerateStatistic,
                "z_score: feature " + std::to_string(j) + " has zero variance");
        }
        spec.parameters[paramKey("mean", j)] = mean;
        spec.parameters[paramKey("std", j)] = std;
      }
      break;
    }
  }
  return spec;
}

TransformSpec fitTransform(const DatasetSnapshot& snapshot, TransformKind kind,
                           TransformScope scope, const std::vector<int>* rowSubset) {
  return fitTransform(snapshot.features, kind, scope, rowSubset);
}

void applyTransformInPlace(Eigen::MatrixXd& features, const TransformSpec& spec) {
  if (!spec.fitted) raise(ErrorKind::InvalidArgument, "transform spec is not fitted");
  const int n = static_cast<int>(features.rows());
  const int p = static_cast<int>(features.cols());

  switch (spec.kind) {
    case TransformKind::Identity:
      break;
    case TransformKind::LinearDetrend:
      for (int i = 0; i < n; ++i) detrendRow(features, i);
      break;
    case TransformKind::MaxNormalize: {
      if (static_cast<int>(spec.parameters.size()) != p) {
        raise(ErrorKind::DimensionMismatch,
              "max_normalize fitted for " + std::to_string(spec.parameters.size()) +
                  " features, data has " + std::to_string(p));
      }
      for (int j = 0; j < p; ++j) {
        const double maxAbs = requireParam(spec, paramKey("max_abs", j));
        features.col(j) /= maxAbs;
      }
      break;
    }
    case TransformKind::MinMax: {
      if (static_cast<int>(spec.parameters.size()) != 2 * p) {
        raise(ErrorKind::DimensionMismatch,
              "min_max fitted for " + std::to_string(spec.parameters.size() / 2) +
                  " features, data has " + std::to_string(p));
      }
      for (int j = 0; j < p; ++j) {
        const double lo = requireParam(spec, paramKey("min", j));
        const double hi = requireParam(spec, paramKey("max", j));
        features.col(j) = (features.col(j).array() - lo) / (hi - lo);
      }
      break;
    }
    case TransformKind::ZScore: {
      if (static_cast<int>(spec.parameters.size()) != 2 * p) {
        raise(ErrorKind::DimensionMismatch,
              "z_score fitted for " + std::to_string(spec.parameters.size() / 2) +
                  " features, data has " + std::to_string(p));
      }
      for (int j = 0; j < p; ++j) {
        const double mean = requireParam(spec, paramKey("mean", j));
        const double std = requireParam(spec, paramKey("std", j));
        features.col(j) = (features.col(j).array() - mean) / std;
      }
      break;
    }
  }
}

DatasetSnapshot applyTransform(const DatasetSnapshot& snapshot, const TransformSpec& spec) {
  DatasetSnapshot out = snapshot;
  applyTransformInPlace(out.features, spec);
  out.parentId = snapshot.snapshotId;
  out.lineage.push_back(spec);
  out.snapshotId = computeSnapshotId(out);
  return out;
}

}  // namespace baselab
