#include "baselab/report.hpp"

#include <algorithm>
#include <cmath>

namespace baselab {

namespace {

std::string upperName(const std::string& metric) {
  if (metric == "r2") return "R2";
  std::string out = metric;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return out;
}

std::string optFixed3(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? fmtFixed(*v, 3) : "n/a";
}

std::string optSig3(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? fmtSig3(*v) : "n/a";
}

std::string cellText(const MetricCell& cell, const char* plusMinus, bool train) {
  if (!cell.present) return "n/a";
  const double mean = train ? cell.trainMean : cell.testMean;
  const double std = train ? cell.trainStd : cell.testStd;
  if (!std::isfinite(mean)) return "n/a";
  return fmtSig3(mean) + " " + plusMinus + " " + fmtSig3(std);
}

std::string statusText(const ReportRow& row) {
  std::string out =
      row.color == RowColor::NotApplicable ? std::string("n/a") : rowColorName(row.color);
  if (row.degenerate) out += " (degenerate)";
  return out;
}

std::string mdCell(const std::string& text, Highlight h) {
  switch (h) {
    case Highlight::None: return text;
    case Highlight::BestLor: return "**" + text + "**";
    case Highlight::BestCos:
    case Highlight::Both: return "***" + text + "***";
  }
  return text;
}

std::string mdEscapePipes(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += "\\|";
    else out += c;
  }
  return out;
}

std::string htmlEscape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string htmlCell(const std::string& text, Highlight h) {
  const std::string escaped = htmlEscape(text);
  switch (h) {
    case Highlight::None: return escaped;
    case Highlight::BestLor: return "<strong>" + escaped + "</strong>";
    case Highlight::BestCos:
    case Highlight::Both: return "<strong><em>" + escaped + "</em></strong>";
  }
  return escaped;
}

std::string markdownTable(const std::vector<std::string>& header,
                          const std::vector<std::vector<std::string>>& rows,
                          const std::vector<Highlight>& highlights) {
  std::string out = "|";
  for (const auto& h : header) out += " " + mdEscapePipes(h) + " |";
  out += "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out += " --- |";
  out += "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += "|";
    for (const auto& cell : rows[r]) {
      out += " " + mdCell(mdEscapePipes(cell), highlights[r]) + " |";
    }
    out += "\n";
  }
  return out;
}

std::string htmlTable(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows,
                      const std::vector<Highlight>& highlights,
                      const std::vector<std::string>& rowClasses) {
  std::string out = "<table>\n<thead><tr>";
  for (const auto& h : header) out += "<th>" + htmlEscape(h) + "</th>";
  out += "</tr></thead>\n<tbody>\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += rowClasses[r].empty() ? "<tr>" : "<tr class=\"" + rowClasses[r] + "\">";
    for (const auto& cell : rows[r]) out += "<td>" + htmlCell(cell, highlights[r]) + "</td>";
    out += "</tr>\n";
  }
  out += "</tbody>\n</table>\n";
  return out;
}

std::string csvTable(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += csvEscape(header[i]);
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csvEscape(row[i]);
    }
    out += '\n';
  }
  return out;
}

bool isNormalization(TransformKind kind) {
  return kind == TransformKind::MaxNormalize || kind == TransformKind::MinMax ||
         kind == TransformKind::ZScore;
}

std::string stepLabel(const PreprocessStep& step) {
  std::string name;
  switch (step.kind) {
    case TransformKind::Identity: name = "identity"; break;
    case TransformKind::LinearDetrend: name = "detrend"; break;
    case TransformKind::MaxNormalize: name = "max=1"; break;
    case TransformKind::MinMax: name = "min-max"; break;
    case TransformKind::ZScore: name = "z-score"; break;
  }
  return name + (step.scope == TransformScope::PerFold ? " (per-fold)" : " (global)");
}

}  // namespace

const char* highlightName(Highlight h) {
  switch (h) {
    case Highlight::None: return "none";
    case Highlight::BestLor: return "best_lor";
    case Highlight::BestCos: return "best_cos";
    case Highlight::Both: return "both";
  }
  return "none";
}

std::string modelLabel(const LearnerSpec& learner) {
  std::string label = modelTypeName(learner.modelType);
  if (!learner.hyperparameters.empty()) {
    label += "(";
    bool first = true;
    for (const auto& [name, value] : learner.hyperparameters) {
      if (!first) label += ", ";
      first = false;
      label += name + "=" + shortestRepr(value);
    }
    label += ")";
  }
  return label;
}

std::string preprocLabel(const std::vector<PreprocessStep>& steps) {
  std::string label;
  for (const auto& step : steps) {
    if (isNormalization(step.kind)) continue;
    if (!label.empty()) label += ", ";
    label += stepLabel(step);
  }
  return label.empty() ? "raw" : label;
}

std::string normalizationLabel(const std::vector<PreprocessStep>& steps) {
  std::string label;
  for (const auto& step : steps) {
    if (!isNormalization(step.kind)) continue;
    if (!label.empty()) label += ", ";
    label += stepLabel(step);
  }
  return label.empty() ? "none" : label;
}

std::string datasetLabel(const std::string& datasetRef) {
  const bool hexId = datasetRef.size() == 64 &&
                     std::all_of(datasetRef.begin(), datasetRef.end(), [](char c) {
                       return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                     });
  return hexId ? datasetRef.substr(0, 12) : datasetRef;
}

ReportRow makeReportRow(const ExperimentOutcome& outcome, Highlight highlight) {
  ReportRow row;
  row.expId = outcome.spec.experimentId;
  row.model = modelLabel(outcome.spec.learner);
  row.preproc = preprocLabel(outcome.spec.preprocessing);
  row.normalization = normalizationLabel(outcome.spec.preprocessing);
  for (const auto& [name, summary] : outcome.summaries) {
    MetricCell cell;
    cell.trainMean = summary.trainMean;
    cell.trainStd = summary.trainStd;
    cell.testMean = summary.testMean;
    cell.testStd = summary.testStd;
    cell.present = true;
    row.metrics[name] = cell;
  }
  row.lor = outcome.diagnostics.lor;
  row.cos = outcome.diagnostics.cos;
  row.r2TestMean = outcome.r2TestMean;
  row.color = outcome.status.color;
  row.degenerate = outcome.status.degenerate;
  row.highlight = highlight;
  return row;
}

std::string renderResultsTable(const std::vector<ReportRow>& rows,
                               const std::vector<std::string>& metricColumns,
                               TableFormat format) {
  if (rows.empty() && format != TableFormat::Csv) {
    raise(ErrorKind::EmptyReport, "results table has no rows");
  }

  std::vector<std::string> header;
  const bool csv = format == TableFormat::Csv;
  if (csv) {
    header = {"exp_id", "model", "preproc", "normalization"};
    for (const auto& m : metricColumns) {
      header.push_back(m + "_train");
      header.push_back(m + "_test");
    }
    header.insert(header.end(), {"lor", "cos", "r2_test", "color", "degenerate", "highlight"});
  } else {
    header = {"Exp. ID", "Model", "Preproc.", "Normal."};
    for (const auto& m : metricColumns) {
      header.push_back(upperName(m) + "±σ (train)");
      header.push_back(upperName(m) + "±σ (test)");
    }
    header.insert(header.end(), {"LOR", "COS", "R² (test)", "Status"});
  }

  std::vector<std::vector<std::string>> cells;
  std::vector<Highlight> highlights;
  std::vector<std::string> rowClasses;
  const char* plusMinus = csv ? "+/-" : "±";
  for (const auto& row : rows) {
    std::vector<std::string> line = {row.expId, row.model, row.preproc, row.normalization};
    for (const auto& m : metricColumns) {
      auto it = row.metrics.find(m);
      const MetricCell cell = it == row.metrics.end() ? MetricCell{} : it->second;
      line.push_back(cellText(cell, plusMinus, true));
      line.push_back(cellText(cell, plusMinus, false));
    }
    line.push_back(optFixed3(row.lor));
    line.push_back(optFixed3(row.cos));
    line.push_back(optSig3(row.r2TestMean));
    if (csv) {
      line.push_back(rowColorName(row.color));
      line.push_back(row.degenerate ? "true" : "false");
      line.push_back(highlightName(row.highlight));
    } else {
      line.push_back(statusText(row));
    }
    cells.push_back(std::move(line));
    highlights.push_back(csv ? Highlight::None : row.highlight);
    switch (row.color) {
      case RowColor::Red: rowClasses.push_back("row-red"); break;
      case RowColor::Yellow: rowClasses.push_back("row-yellow"); break;
      case RowColor::Green: rowClasses.push_back("row-green"); break;
      case RowColor::NotApplicable: rowClasses.push_back(""); break;
    }
  }

  switch (format) {
    case TableFormat::Markdown: return markdownTable(header, cells, highlights);
    case TableFormat::Csv: return csvTable(header, cells);
    case TableFormat::Html: return htmlTable(header, cells, highlights, rowClasses);
  }
  return "";
}

std::string renderPlanTable(const std::vector<ExperimentSpec>& specs, TableFormat format) {
  if (specs.empty()) raise(ErrorKind::EmptyReport, "plan table has no rows");

  std::vector<std::string> header;
  if (format == TableFormat::Csv) {
    header = {"exp_id", "task", "preproc", "normalization", "instance", "metrics", "dataset",
              "notes"};
  } else {
    header = {"Exp. ID", "Task", "Preproc.", "Normal.", "Instance", "Metrics", "Dataset",
              "Notes"};
  }

  std::vector<std::vector<std::string>> cells;
  std::vector<Highlight> highlights(specs.size(), Highlight::None);
  std::vector<std::string> rowClasses(specs.size(), "");
  for (const auto& spec : specs) {
    std::string metrics;
    for (std::size_t i = 0; i < spec.metricNames.size(); ++i) {
      if (i) metrics += ", ";
      metrics += spec.metricNames[i];
    }
    cells.push_back({spec.experimentId, taskName(spec.task), preprocLabel(spec.preprocessing),
                     normalizationLabel(spec.preprocessing), modelLabel(spec.learner), metrics,
                     datasetLabel(spec.datasetRef), spec.notes});
  }

  switch (format) {
    case TableFormat::Markdown: return markdownTable(header, cells, highlights);
    case TableFormat::Csv: return csvTable(header, cells);
    case TableFormat::Html: return htmlTable(header, cells, highlights, rowClasses);
  }
  return "";
}

std::string renderConfusionTable(const std::vector<std::vector<long long>>& matrix) {
  const int k = static_cast<int>(matrix.size());
  std::string out = "|  |";
  for (int j = 0; j < k; ++j) out += " pred " + std::to_string(j) + " |";
  out += "\n|";
  for (int j = 0; j <= k; ++j) out += " --- |";
  out += "\n";
  for (int i = 0; i < k; ++i) {
    out += "| true " + std::to_string(i) + " |";
    for (int j = 0; j < k; ++j) out += " " + std::to_string(matrix[i][j]) + " |";
    out += "\n";
  }
  return out;
}

}  // namespace baselab
