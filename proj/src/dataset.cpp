#include "baselab/dataset.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>

namespace baselab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sha256Hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    raise(ErrorKind::IoError, "sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

bool parseDouble(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  if (begin == end) return false;
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

bool parseInteger(const std::string& text, long long& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  if (begin == end) return false;
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

json lineageToJson(const std::vector<TransformSpec>& lineage) {
  json arr = json::array();
  for (const auto& spec : lineage) {
    json params = json::object();
    for (const auto& [name, value] : spec.parameters) params[name] = value;
    arr.push_back({{"kind", transformKindName(spec.kind)},
                   {"scope", transformScopeName(spec.scope)},
                   {"parameters", params},
                   {"fitted", spec.fitted}});
  }
  return arr;
}

std::vector<TransformSpec> lineageFromJson(const json& arr) {
  std::vector<TransformSpec> lineage;
  for (const auto& item : arr) {
    TransformSpec spec;
    spec.kind = parseTransformKind(item.at("kind").get<std::string>());
    spec.scope = parseTransformScope(item.at("scope").get<std::string>());
    spec.fitted = item.at("fitted").get<bool>();
    for (auto it = item.at("parameters").begin(); it != item.at("parameters").end(); ++it) {
      spec.parameters[it.key()] = it.value().get<double>();
    }
    lineage.push_back(std::move(spec));
  }
  return lineage;
}

std::string dataFileText(const DatasetSnapshot& snapshot) {
  std::string out;
  for (std::size_t j = 0; j < snapshot.featureNames.size(); ++j) {
    if (j) out += ',';
    out += csvEscape(snapshot.featureNames[j]);
  }
  if (!snapshot.featureNames.empty()) out += ',';
  out += csvEscape(snapshot.targetName);
  out += '\n';
  const int n = snapshot.numSamples();
  const int p = snapshot.numFeatures();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      out += shortestRepr(snapshot.features(i, j));
      out += ',';
    }
    out += shortestRepr(snapshot.target[i]);
    out += '\n';
  }
  return out;
}

}  // namespace

const char* transformKindName(TransformKind kind) {
  switch (kind) {
    case TransformKind::Identity: return "identity";
    case TransformKind::MaxNormalize: return "max_normalize";
    case TransformKind::MinMax: return "min_max";
    case TransformKind::ZScore: return "z_score";
    case TransformKind::LinearDetrend: return "linear_detrend";
  }
  return "unknown";
}

TransformKind parseTransformKind(const std::string& name) {
  if (name == "identity") return TransformKind::Identity;
  if (name == "max_normalize") return TransformKind::MaxNormalize;
  if (name == "min_max") return TransformKind::MinMax;
  if (name == "z_score") return TransformKind::ZScore;
  if (name == "linear_detrend") return TransformKind::LinearDetrend;
  raise(ErrorKind::InvalidArgument, "unknown transform '" + name + "'");
}

const char* transformScopeName(TransformScope scope) {
  return scope == TransformScope::Global ? "global" : "per_fold";
}

TransformScope parseTransformScope(const std::string& name) {
  if (name == "global") return TransformScope::Global;
  if (name == "per_fold" || name == "per-fold") return TransformScope::PerFold;
  raise(ErrorKind::InvalidArgument, "unknown transform scope '" + name + "'");
}

int DatasetSnapshot::numClasses() const {
  if (taskKind != TaskKind::Classification) return 0;
  long long maxLabel = 0;
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    maxLabel = std::max(maxLabel, std::llround(target[i]));
  }
  return static_cast<int>(maxLabel) + 1;
}

// Canonical text: header metadata, then row-major feature values, then the
// target, every number in shortest round-trip form.
std::string computeSnapshotId(const DatasetSnapshot& snapshot) {
  std::string text = "baselab-snapshot-v1\n";
  text += "task:";
  text += taskName(snapshot.taskKind);
  text += '\n';
  text += "target:" + csvEscape(snapshot.targetName) + '\n';
  text += "features:";
  for (std::size_t j = 0; j < snapshot.featureNames.size(); ++j) {
    if (j) text += ',';
    text += csvEscape(snapshot.featureNames[j]);
  }
  text += '\n';
  text += "labels:";
  for (std::size_t j = 0; j < snapshot.labelMapping.size(); ++j) {
    if (j) text += ',';
    text += csvEscape(snapshot.labelMapping[j]);
  }
  text += '\n';
  text += "lineage:" + lineageToJson(snapshot.lineage).dump() + '\n';
  const int n = snapshot.numSamples();
  const int p = snapshot.numFeatures();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      text += shortestRepr(snapshot.features(i, j));
      text += ',';
    }
    text += '\n';
  }
  text += "y:";
  for (int i = 0; i < n; ++i) {
    text += shortestRepr(snapshot.target[i]);
    text += ',';
  }
  text += '\n';
  return sha256Hex(text);
}

DatasetSnapshot loadCsv(const std::string& path, const std::string& targetColumn,
                        TaskKind taskKind) {
  const auto rows = parseCsvFile(path);
  if (rows.empty()) raise(ErrorKind::MalformedCsv, path + ": missing header row");
  const auto& header = rows[0];
  if (header.empty()) raise(ErrorKind::MalformedCsv, path + ": empty header row");

  int targetIdx = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == targetColumn) {
      targetIdx = static_cast<int>(j);
      break;
    }
  }
  if (targetIdx < 0) {
    raise(ErrorKind::MalformedCsv, path + ": target column '" + targetColumn + "' not found");
  }
  for (std::size_t a = 0; a < header.size(); ++a) {
    if (header[a].empty()) {
      raise(ErrorKind::MalformedCsv, path + ": empty column name at column " + std::to_string(a + 1));
    }
    for (std::size_t b = a + 1; b < header.size(); ++b) {
      if (header[a] == header[b]) {
        raise(ErrorKind::MalformedCsv, path + ": duplicate column name '" + header[a] + "'");
      }
    }
  }

  const int numColumns = static_cast<int>(header.size());
  const int numDataRows = static_cast<int>(rows.size()) - 1;
  if (numDataRows == 0) raise(ErrorKind::EmptyDataset, path + ": no data rows");
  const int p = numColumns - 1;
  if (p == 0) raise(ErrorKind::EmptyDataset, path + ": no feature columns");

  DatasetSnapshot snapshot;
  snapshot.taskKind = taskKind;
  snapshot.targetName = header[targetIdx];
  for (int j = 0; j < numColumns; ++j) {
    if (j != targetIdx) snapshot.featureNames.push_back(header[j]);
  }
  snapshot.features.resize(numDataRows, p);
  snapshot.target.resize(numDataRows);

  std::vector<std::string> rawTargets(numDataRows);
  for (int i = 0; i < numDataRows; ++i) {
    const auto& row = rows[i + 1];
    if (static_cast<int>(row.size()) != numColumns) {
      raise(ErrorKind::MalformedCsv, path + ": row " + std::to_string(i + 1) + " has " +
                                         std::to_string(row.size()) + " cells, expected " +
                                         std::to_string(numColumns));
    }
    int col = 0;
    for (int j = 0; j < numColumns; ++j) {
      if (j == targetIdx) {
        rawTargets[i] = row[j];
        continue;
      }
      double value = 0.0;
      if (!parseDouble(row[j], value) || !std::isfinite(value)) {
        raise(ErrorKind::NonNumericFeature, path + ": non-numeric value '" + row[j] +
                                                "' in column '" + header[j] + "' at row " +
                                                std::to_string(i + 1));
      }
      snapshot.features(i, col++) = value;
    }
  }

  if (taskKind == TaskKind::Regression) {
    for (int i = 0; i < numDataRows; ++i) {
      double value = 0.0;
      if (!parseDouble(rawTargets[i], value) || !std::isfinite(value)) {
        raise(ErrorKind::NonNumericFeature, path + ": non-numeric target '" + rawTargets[i] +
                                                "' at row " + std::to_string(i + 1));
      }
      snapshot.target[i] = value;
    }
  } else {
    bool allIntegers = true;
    std::vector<long long> intLabels(numDataRows);
    for (int i = 0; i < numDataRows; ++i) {
      if (!parseInteger(rawTargets[i], intLabels[i])) {
        allIntegers = false;
        break;
      }
    }
    if (allIntegers) {
      for (int i = 0; i < numDataRows; ++i) {
        if (intLabels[i] < 0) {
          raise(ErrorKind::LabelOutOfRange, path + ": negative class label " +
                                                std::to_string(intLabels[i]) + " at row " +
                                                std::to_string(i + 1));
        }
        snapshot.target[i] = static_cast<double>(intLabels[i]);
      }
    } else {
      // Distinct strings map to 0, 1, ... in first-appearance order.
      std::vector<std::string> seen;
      for (int i = 0; i < numDataRows; ++i) {
        auto it = std::find(seen.begin(), seen.end(), rawTargets[i]);
        int label;
        if (it == seen.end()) {
          label = static_cast<int>(seen.size());
          seen.push_back(rawTargets[i]);
        } else {
          label = static_cast<int>(it - seen.begin());
        }
        snapshot.target[i] = label;
      }
      snapshot.labelMapping = std::move(seen);
    }
  }

  snapshot.parentId = "raw";
  snapshot.snapshotId = computeSnapshotId(snapshot);
  return snapshot;
}

std::string saveSnapshot(const DatasetSnapshot& snapshot, const std::string& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  const fs::path dir(directory);
  const fs::path dataPath = dir / (snapshot.snapshotId + ".csv");
  const fs::path manifestPath = dir / (snapshot.snapshotId + ".manifest.json");

  writeTextFile(dataPath.string(), dataFileText(snapshot));

  json manifest = {
      {"snapshot_id", snapshot.snapshotId},
      {"parent_id", snapshot.parentId},
      {"task_kind", taskName(snapshot.taskKind)},
      {"n_samples", snapshot.numSamples()},
      {"n_features", snapshot.numFeatures()},
      {"feature_names", snapshot.featureNames},
      {"target_name", snapshot.targetName},
      {"lineage", lineageToJson(snapshot.lineage)},
  };
  if (!snapshot.labelMapping.empty()) manifest["label_mapping"] = snapshot.labelMapping;
  writeTextFile(manifestPath.string(), manifest.dump(2) + "\n");
  return manifestPath.string();
}

DatasetSnapshot loadSnapshot(const std::string& manifestPath) {
  json manifest;
  try {
    manifest = json::parse(readTextFile(manifestPath));
  } catch (const json::exception& e) {
    raise(ErrorKind::IoError, manifestPath + ": invalid manifest: " + e.what());
  }

  DatasetSnapshot snapshot;
  try {
    snapshot.snapshotId = manifest.at("snapshot_id").get<std::string>();
    snapshot.parentId = manifest.at("parent_id").get<std::string>();
    snapshot.taskKind = parseTask(manifest.at("task_kind").get<std::string>());
    snapshot.featureNames = manifest.at("feature_names").get<std::vector<std::string>>();
    snapshot.targetName = manifest.at("target_name").get<std::string>();
    snapshot.lineage = lineageFromJson(manifest.at("lineage"));
    if (manifest.contains("label_mapping")) {
      snapshot.labelMapping = manifest.at("label_mapping").get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    raise(ErrorKind::IoError, manifestPath + ": manifest field error: " + e.what());
  }

  std::string stem = manifestPath;
  const std::string suffix = ".manifest.json";
  if (stem.size() >= suffix.size() && stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
    stem.resize(stem.size() - suffix.size());
  }
  const std::string dataPath = stem + ".csv";
  if (!fs::exists(dataPath)) raise(ErrorKind::IoError, "snapshot data file missing: " + dataPath);

  const auto rows = parseCsvFile(dataPath);
  const int expectedRows = manifest.at("n_samples").get<int>();
  const int expectedCols = manifest.at("n_features").get<int>();
  if (static_cast<int>(rows.size()) != expectedRows + 1) {
    raise(ErrorKind::IoError, dataPath + ": row count does not match manifest");
  }
  snapshot.features.resize(expectedRows, expectedCols);
  snapshot.target.resize(expectedRows);
  for (int i = 0; i < expectedRows; ++i) {
    const auto& row = rows[i + 1];
    if (static_cast<int>(row.size()) != expectedCols + 1) {
      raise(ErrorKind::IoError, dataPath + ": column count does not match manifest");
    }
    for (int j = 0; j <= expectedCols; ++j) {
      double value = 0.0;
      if (!parseDouble(row[j], value)) {
        raise(ErrorKind::IoError, dataPath + ": unparseable value '" + row[j] + "'");
      }
      if (j < expectedCols) {
        snapshot.features(i, j) = value;
      } else {
        snapshot.target[i] = value;
      }
    }
  }

  const std::string recomputed = computeSnapshotId(snapshot);
  if (recomputed != snapshot.snapshotId) {
    raise(ErrorKind::HashMismatch, manifestPath + ": stored id " + snapshot.snapshotId +
                                       " but content hashes to " + recomputed);
  }
  return snapshot;
}

}  // namespace baselab
