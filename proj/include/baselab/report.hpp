#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "baselab/experiment.hpp"
#include "baselab/selection.hpp"

namespace baselab {

enum class TableFormat { Markdown, Csv, Html };
enum class Highlight { None, BestLor, BestCos, Both };

const char* highlightName(Highlight h);

struct MetricCell {
  double trainMean = 0.0;
  double trainStd = 0.0;
  double testMean = 0.0;
  double testStd = 0.0;
  bool present = false;
};

// One results-table row: labels, per-metric mean/std pairs at full
// precision, the diagnostics, and the status/highlight flags.
struct ReportRow {
  std::string expId;
  std::string model;
  std::string preproc;
  std::string normalization;
  std::map<std::string, MetricCell> metrics;
  std::optional<double> lor;
  std::optional<double> cos;
  std::optional<double> r2TestMean;
  RowColor color = RowColor::NotApplicable;
  bool degenerate = false;
  Highlight highlight = Highlight::None;
};

std::string modelLabel(const LearnerSpec& learner);
std::string preprocLabel(const std::vector<PreprocessStep>& steps);
std::string normalizationLabel(const std::vector<PreprocessStep>& steps);
std::string datasetLabel(const std::string& datasetRef);

ReportRow makeReportRow(const ExperimentOutcome& outcome, Highlight highlight);

// Best-LOR rows render bold, best-COS rows bold italic; HTML rows carry
// red/yellow/green style classes. Metrics print at 3 significant digits,
// LOR/COS at 3 decimals, undefined values as "n/a".
std::string renderResultsTable(const std::vector<ReportRow>& rows,
                               const std::vector<std::string>& metricColumns, TableFormat format);

std::string renderPlanTable(const std::vector<ExperimentSpec>& specs, TableFormat format);

std::string renderConfusionTable(const std::vector<std::vector<long long>>& matrix);

}  // namespace baselab
