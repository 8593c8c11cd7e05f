#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "baselab/common.hpp"

namespace baselab {

enum class TransformKind { Identity, MaxNormalize, MinMax, ZScore, LinearDetrend };
enum class TransformScope { Global, PerFold };

const char* transformKindName(TransformKind kind);
TransformKind parseTransformKind(const std::string& name);
const char* transformScopeName(TransformScope scope);
TransformScope parseTransformScope(const std::string& name);

struct TransformSpec {
  TransformKind kind = TransformKind::Identity;
  TransformScope scope = TransformScope::Global;
  std::map<std::string, double> parameters;
  bool fitted = false;
};

// Immutable, content-hashed dataset version. The id is a SHA-256 over a
// canonical serialization of values, names, task and lineage, so equal
// content always maps to the same id.
struct DatasetSnapshot {
  std::string snapshotId;
  std::string parentId = "raw";
  TaskKind taskKind = TaskKind::Regression;
  Eigen::MatrixXd features;  // n_samples x n_features
  Eigen::VectorXd target;
  std::vector<std::string> featureNames;
  std::string targetName;
  std::vector<TransformSpec> lineage;
  std::vector<std::string> labelMapping;  // set when string labels were mapped

  int numSamples() const { return static_cast<int>(features.rows()); }
  int numFeatures() const { return static_cast<int>(features.cols()); }
  int numClasses() const;
};

std::string computeSnapshotId(const DatasetSnapshot& snapshot);

DatasetSnapshot loadCsv(const std::string& path, const std::string& targetColumn,
                        TaskKind taskKind);

// Fits transform statistics on the given rows (all rows when omitted).
TransformSpec fitTransform(const Eigen::MatrixXd& features, TransformKind kind,
                           TransformScope scope,
                           const std::vector<int>* rowSubset = nullptr);
TransformSpec fitTransform(const DatasetSnapshot& snapshot, TransformKind kind,
                           TransformScope scope,
                           const std::vector<int>* rowSubset = nullptr);

void applyTransformInPlace(Eigen::MatrixXd& features, const TransformSpec& spec);
DatasetSnapshot applyTransform(const DatasetSnapshot& snapshot, const TransformSpec& spec);

// Writes <id>.csv plus <id>.manifest.json under directory, returns the
// manifest path. Values round-trip bit-exactly through loadSnapshot.
std::string saveSnapshot(const DatasetSnapshot& snapshot, const std::string& directory);
DatasetSnapshot loadSnapshot(const std::string& manifestPath);

}  // namespace baselab
