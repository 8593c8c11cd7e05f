#include "baselab/common.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace baselab {

const char* taskName(TaskKind task) {
  return task == TaskKind::Regression ? "regression" : "classification";
}

TaskKind parseTask(const std::string& name) {
  if (name == "regression") return TaskKind::Regression;
  if (name == "classification") return TaskKind::Classification;
  raise(ErrorKind::InvalidArgument, "unknown task '" + name + "'");
}

const char* errorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::MalformedCsv: return "MalformedCsv";
    case ErrorKind::NonNumericFeature: return "NonNumericFeature";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DegenerateStatistic: return "DegenerateStatistic";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::HashMismatch: return "HashMismatch";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InvalidHyperparameter: return "InvalidHyperparameter";
    case ErrorKind::UnsupportedForModel: return "UnsupportedForModel";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::InvalidPlan: return "InvalidPlan";
    case ErrorKind::StratificationImpossible: return "StratificationImpossible";
    case ErrorKind::UndefinedDiagnostic: return "UndefinedDiagnostic";
    case ErrorKind::MissingResults: return "MissingResults";
    case ErrorKind::EmptyReport: return "EmptyReport";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mixSeed(std::uint64_t root, std::uint64_t stream) {
  return mix64(root + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

std::string shortestRepr(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string fmtFixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string fmtSig3(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", value);
  return buf;
}

std::string csvEscape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// RFC-4180-ish: quoted fields may contain commas, newlines and doubled quotes.
std::vector<std::vector<std::string>> parseCsvText(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool fieldStarted = false;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto endField = [&]() {
    row.push_back(std::move(field));
    field.clear();
    fieldStarted = false;
  };
  auto endRow = [&]() {
    endField();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < n) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field += c;
        ++i;
      }
      continue;
    }
    if (c == '"' && !fieldStarted && field.empty()) {
      quoted = true;
      fieldStarted = true;
      ++i;
    } else if (c == ',') {
      endField();
      ++i;
    } else if (c == '\r') {
      if (i + 1 < n && text[i + 1] == '\n') ++i;
      endRow();
      ++i;
    } else if (c == '\n') {
      endRow();
      ++i;
    } else {
      field += c;
      fieldStarted = true;
      ++i;
    }
  }
  if (quoted) raise(ErrorKind::MalformedCsv, "unterminated quoted field");
  if (fieldStarted || !field.empty() || !row.empty()) endRow();
  return rows;
}

std::vector<std::vector<std::string>> parseCsvFile(const std::string& path) {
  return parseCsvText(readTextFile(path));
}

std::string readTextFile(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    raise(ErrorKind::FileNotFound, path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) raise(ErrorKind::IoError, "read failed for " + path);
  return buf.str();
}

void writeTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::IoError, "cannot write " + path);
  out << content;
  out.flush();
  if (!out) raise(ErrorKind::IoError, "write failed for " + path);
}

}  // namespace baselab
