#pragma once

#include <optional>
#include <string>
#include <vector>

#include "baselab/plan.hpp"
#include "baselab/report.hpp"

namespace baselab {

struct RunOptions {
  std::string planDir;  // base directory for relative dataset references
  std::optional<std::uint64_t> seedOverride;
  int jobs = 1;
};

struct ExperimentFailure {
  std::string experimentId;
  std::string message;
};

struct RunResult {
  PlanFile plan;  // seeds resolved
  std::uint64_t rootSeed = 0;
  std::vector<ExperimentOutcome> outcomes;
  std::vector<ExperimentFailure> failures;
  SelectionResult selection;
  std::vector<std::string> metricColumns;  // first-appearance order
  std::vector<std::string> snapshotIds;
  std::string startedAt;
  std::string finishedAt;
};

Highlight highlightFor(const std::string& experimentId, const SelectionResult& selection);

RunResult runPlan(const PlanFile& plan, const RunOptions& options);

// fold_metrics.csv, summary.csv, run_metadata.json, plan_resolved.json and
// details/<exp>.json. Everything except the metadata timestamps is
// byte-deterministic for a given plan, data and seed.
std::vector<std::string> persistResults(const RunResult& result, const std::string& outDir);

struct ReportFormats {
  bool markdown = true;
  bool csv = false;
  bool html = false;
};

// Renders tables and plots from a persisted results directory.
std::vector<std::string> writeReport(const std::string& resultsDir, const ReportFormats& formats,
                                     const std::string& outDir = "");

}  // namespace baselab
