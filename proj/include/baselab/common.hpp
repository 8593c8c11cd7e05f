#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace baselab {

inline constexpr const char* kToolVersion = "baselab 0.1.0";

enum class TaskKind { Regression, Classification };

const char* taskName(TaskKind task);
TaskKind parseTask(const std::string& name);

enum class ErrorKind {
  FileNotFound,
  MalformedCsv,
  NonNumericFeature,
  EmptyDataset,
  DegenerateStatistic,
  DimensionMismatch,
  IoError,
  HashMismatch,
  InsufficientData,
  InvalidHyperparameter,
  UnsupportedForModel,
  LengthMismatch,
  EmptyInput,
  LabelOutOfRange,
  InvalidPlan,
  StratificationImpossible,
  UndefinedDiagnostic,
  MissingResults,
  EmptyReport,
  InvalidArgument,
};

const char* errorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(errorKindName(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

// Counter-based splitmix64 stream. Sub-streams derived with mixSeed are
// independent of execution order, which keeps fold- and tree-level
// parallelism bit-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n) via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t r = next();
    while (r >= limit) r = next();
    return r % n;
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t mixSeed(std::uint64_t root, std::uint64_t stream);

// Shortest decimal text that parses back to exactly the same double.
std::string shortestRepr(double value);
std::string fmtFixed(double value, int decimals);
std::string fmtSig3(double value);

std::string csvEscape(const std::string& field);
std::vector<std::vector<std::string>> parseCsvText(const std::string& text);
std::vector<std::vector<std::string>> parseCsvFile(const std::string& path);

std::string readTextFile(const std::string& path);
void writeTextFile(const std::string& path, const std::string& content);

}  // namespace baselab
