#include "baselab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "baselab/svg.hpp"

namespace baselab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string nowUtc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool looksLikeSnapshotId(const std::string& ref) {
  if (ref.size() != 64) return false;
  return std::all_of(ref.begin(), ref.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
}

DatasetSnapshot resolveSnapshot(const std::string& ref, const std::string& planDir) {
  std::vector<fs::path> candidates;
  if (looksLikeSnapshotId(ref)) {
    candidates.push_back(fs::path(planDir) / (ref + ".manifest.json"));
    candidates.push_back(fs::path(planDir) / "snapshots" / (ref + ".manifest.json"));
  } else {
    const fs::path given(ref);
    if (given.is_absolute()) {
      candidates.push_back(given);
    } else {
      candidates.push_back(fs::path(planDir) / given);
      candidates.push_back(given);
    }
  }
  for (const auto& candidate : candidates) {
    if (fs::exists(candidate)) return loadSnapshot(candidate.string());
  }
  raise(ErrorKind::FileNotFound, "dataset_ref '" + ref + "' could not be resolved");
}

std::string valueOrNa(double v) {
  return std::isfinite(v) ? shortestRepr(v) : "n/a";
}

std::string optOrNa(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? shortestRepr(*v) : "n/a";
}

json foldToJson(const FoldRecord& fold) {
  json j;
  j["fold_index"] = fold.foldIndex;
  j["train_indices"] = fold.trainIndices;
  j["test_indices"] = fold.testIndices;
  json trainMetrics = json::object();
  json testMetrics = json::object();
  for (const auto& [name, value] : fold.trainMetrics) {
    trainMetrics[name] = std::isfinite(value) ? json(value) : json();
  }
  for (const auto& [name, value] : fold.testMetrics) {
    testMetrics[name] = std::isfinite(value) ? json(value) : json();
  }
  j["train_metrics"] = trainMetrics;
  j["test_metrics"] = testMetrics;
  std::vector<double> preds(fold.testPredictions.data(),
                            fold.testPredictions.data() + fold.testPredictions.size());
  std::vector<double> truth(fold.testTrueValues.data(),
                            fold.testTrueValues.data() + fold.testTrueValues.size());
  j["test_predictions"] = preds;
  j["test_true_values"] = truth;
  if (!fold.trainConfusion.empty()) {
    j["train_confusion"] = fold.trainConfusion;
    j["test_confusion"] = fold.testConfusion;
  }
  json transforms = json::array();
  for (const auto& spec : fold.foldTransforms) {
    json params = json::object();
    for (const auto& [name, value] : spec.parameters) params[name] = value;
    transforms.push_back({{"kind", transformKindName(spec.kind)},
                          {"scope", transformScopeName(spec.scope)},
                          {"parameters", params}});
  }
  j["transforms"] = transforms;
  j["degenerate_flag"] = fold.degenerateFlag;
  if (fold.trainingTrace) {
    j["trace"] = {{"train_loss", fold.trainingTrace->trainLoss},
                  {"validation_loss", fold.trainingTrace->validationLoss},
                  {"stopped_epoch", fold.trainingTrace->stoppedEpoch},
                  {"stop_reason",
                   fold.trainingTrace->stopReason == TrainingTrace::StopReason::EarlyStopping
                       ? "early_stopping"
                       : "max_epochs"}};
  }
  return j;
}

struct PersistedRun {
  std::vector<ReportRow> rows;
  std::vector<std::string> metricColumns;
  std::vector<ExperimentSpec> specs;
  std::vector<ExperimentFailure> failures;
  json metadata;
};

std::optional<double> parseOptional(const std::string& text) {
  if (text == "n/a" || text.empty()) return std::nullopt;
  return std::stod(text);
}

Highlight parseHighlight(const std::string& name) {
  if (name == "best_lor") return Highlight::BestLor;
  if (name == "best_cos") return Highlight::BestCos;
  if (name == "both") return Highlight::Both;
  return Highlight::None;
}

RowColor parseColor(const std::string& name) {
  if (name == "red") return RowColor::Red;
  if (name == "yellow") return RowColor::Yellow;
  if (name == "green") return RowColor::Green;
  return RowColor::NotApplicable;
}

PersistedRun readPersisted(const std::string& resultsDir) {
  const fs::path dir(resultsDir);
  const fs::path summaryPath = dir / "summary.csv";
  if (!fs::exists(summaryPath)) {
    raise(ErrorKind::MissingResults, resultsDir + " does not contain summary.csv");
  }
  PersistedRun run;

  const auto table = parseCsvFile(summaryPath.string());
  if (table.empty()) raise(ErrorKind::MissingResults, "summary.csv is empty");
  const auto& header = table[0];
  // Metric columns sit between the four label columns and the trailing
  // lor,cos,r2_test_mean,color,degenerate,highlight block.
  for (std::size_t c = 4; c + 6 < header.size() + 0; ++c) {
    const std::string& name = header[c];
    const std::string suffix = "_train_mean";
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      run.metricColumns.push_back(name.substr(0, name.size() - suffix.size()));
    }
  }
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& cells = table[r];
    ReportRow row;
    row.expId = cells[0];
    row.model = cells[1];
    row.preproc = cells[2];
    row.normalization = cells[3];
    std::size_t c = 4;
    for (const auto& metric : run.metricColumns) {
      MetricCell cell;
      const auto tm = parseOptional(cells[c]);
      const auto ts = parseOptional(cells[c + 1]);
      const auto em = parseOptional(cells[c + 2]);
      const auto es = parseOptional(cells[c + 3]);
      c += 4;
      if (tm) {
        cell.present = true;
        cell.trainMean = *tm;
        cell.trainStd = ts.value_or(0.0);
        cell.testMean = em.value_or(std::numeric_limits<double>::quiet_NaN());
        cell.testStd = es.value_or(0.0);
      }
      row.metrics[metric] = cell;
    }
    row.lor = parseOptional(cells[c]);
    row.cos = parseOptional(cells[c + 1]);
    row.r2TestMean = parseOptional(cells[c + 2]);
    row.color = parseColor(cells[c + 3]);
    row.degenerate = cells[c + 4] == "true";
    row.highlight = parseHighlight(cells[c + 5]);
    run.rows.push_back(std::move(row));
  }

  const fs::path planPath = dir / "plan_resolved.json";
  if (fs::exists(planPath)) {
    std::vector<std::string> ignored;
    const PlanFile plan = loadPlan(planPath.string(), ignored);
    for (const auto& planExp : plan.experiments) run.specs.push_back(planExp.spec);
  }

  const fs::path metaPath = dir / "run_metadata.json";
  if (fs::exists(metaPath)) {
    run.metadata = json::parse(readTextFile(metaPath.string()));
    if (run.metadata.contains("failures")) {
      for (const auto& f : run.metadata.at("failures")) {
        run.failures.push_back({f.at("experiment_id").get<std::string>(),
                                f.at("error").get<std::string>()});
      }
    }
  }
  return run;
}

}  // namespace

Highlight highlightFor(const std::string& experimentId, const SelectionResult& selection) {
  const bool lorBest = selection.bestLorExperimentId == experimentId;
  const bool cosBest = selection.bestCosExperimentId == experimentId;
  if (lorBest && cosBest) return Highlight::Both;
  if (lorBest) return Highlight::BestLor;
  if (cosBest) return Highlight::BestCos;
  return Highlight::None;
}

RunResult runPlan(const PlanFile& plan, const RunOptions& options) {
  RunResult result;
  result.plan = plan;
  result.rootSeed = options.seedOverride.value_or(plan.defaultSeed.value_or(0));
  result.startedAt = nowUtc();

  // Explicit per-experiment seeds stay; absent ones derive from the root
  // seed by position so runs are reproducible from the root alone.
  for (std::size_t i = 0; i < result.plan.experiments.size(); ++i) {
    auto& planExp = result.plan.experiments[i];
    if (!planExp.cvSeedSet) {
      planExp.spec.splitPlan.seed = mixSeed(result.rootSeed, 2 * i);
    }
    if (!planExp.modelSeedSet) {
      planExp.spec.learner.seed = mixSeed(result.rootSeed, 2 * i + 1);
    }
  }

  std::set<std::string> metricSeen;
  std::set<std::string> snapshotSeen;
  std::map<std::string, DatasetSnapshot> cache;
  for (const auto& planExp : result.plan.experiments) {
    const auto& spec = planExp.spec;
    try {
      auto cached = cache.find(spec.datasetRef);
      if (cached == cache.end()) {
        cached = cache.emplace(spec.datasetRef,
                               resolveSnapshot(spec.datasetRef, options.planDir)).first;
      }
      const DatasetSnapshot& snapshot = cached->second;
      auto folds = runExperiment(spec, snapshot, options.jobs);
      result.outcomes.push_back(
          summarizeExperiment(spec, snapshot, std::move(folds), plan.diagnostics));
      if (snapshotSeen.insert(snapshot.snapshotId).second) {
        result.snapshotIds.push_back(snapshot.snapshotId);
      }
      for (const auto& metric : spec.metricNames) {
        if (metricSeen.insert(metric).second) result.metricColumns.push_back(metric);
      }
    } catch (const std::exception& e) {
      result.failures.push_back({spec.experimentId, e.what()});
    }
  }

  std::vector<SelectionRow> selectionRows;
  for (const auto& outcome : result.outcomes) {
    SelectionRow row;
    row.experimentId = outcome.spec.experimentId;
    row.task = outcome.spec.task;
    row.diagnostics = outcome.diagnostics;
    row.status = outcome.status;
    row.testMetricMean = outcome.diagnosticMetric.empty()
                             ? 0.0
                             : outcome.summaries.at(outcome.diagnosticMetric).testMean;
    selectionRows.push_back(std::move(row));
  }
  result.selection = selectBest(selectionRows);
  result.finishedAt = nowUtc();
  return result;
}

std::vector<std::string> persistResults(const RunResult& result, const std::string& outDir) {
  std::error_code ec;
  fs::create_directories(fs::path(outDir) / "details", ec);
  if (!fs::exists(outDir)) raise(ErrorKind::IoError, "cannot create " + outDir);
  std::vector<std::string> written;

  // Fold-level CSV: one row per (experiment, fold, partition, metric).
  std::string foldCsv = "exp_id,fold_index,partition,metric,value\n";
  for (const auto& outcome : result.outcomes) {
    for (const auto& fold : outcome.folds) {
      for (const char* partition : {"train", "test"}) {
        const auto& metrics =
            std::string(partition) == "train" ? fold.trainMetrics : fold.testMetrics;
        for (const auto& metric : outcome.spec.metricNames) {
          foldCsv += csvEscape(outcome.spec.experimentId) + "," +
                     std::to_string(fold.foldIndex) + "," + partition + "," + metric + "," +
                     valueOrNa(metrics.at(metric)) + "\n";
        }
      }
    }
  }
  const std::string foldPath = (fs::path(outDir) / "fold_metrics.csv").string();
  writeTextFile(foldPath, foldCsv);
  written.push_back(foldPath);

  // Summary CSV holds full-precision values; rendered tables format later.
  std::string summaryCsv = "exp_id,model,preproc,normalization";
  for (const auto& metric : result.metricColumns) {
    summaryCsv += "," + metric + "_train_mean," + metric + "_train_std," + metric +
                  "_test_mean," + metric + "_test_std";
  }
  summaryCsv += ",lor,cos,r2_test_mean,color,degenerate,highlight\n";
  for (const auto& outcome : result.outcomes) {
    summaryCsv += csvEscape(outcome.spec.experimentId) + "," +
                  csvEscape(modelLabel(outcome.spec.learner)) + "," +
                  csvEscape(preprocLabel(outcome.spec.preprocessing)) + "," +
                  csvEscape(normalizationLabel(outcome.spec.preprocessing));
    for (const auto& metric : result.metricColumns) {
      auto it = outcome.summaries.find(metric);
      if (it == outcome.summaries.end()) {
        summaryCsv += ",n/a,n/a,n/a,n/a";
      } else {
        summaryCsv += "," + valueOrNa(it->second.trainMean) + "," +
                      valueOrNa(it->second.trainStd) + "," + valueOrNa(it->second.testMean) +
                      "," + valueOrNa(it->second.testStd);
      }
    }
    summaryCsv += "," + optOrNa(outcome.diagnostics.lor) + "," + optOrNa(outcome.diagnostics.cos) +
                  "," + optOrNa(outcome.r2TestMean) + "," + rowColorName(outcome.status.color) +
                  "," + (outcome.status.degenerate ? "true" : "false") + "," +
                  highlightName(highlightFor(outcome.spec.experimentId, result.selection)) + "\n";
  }
  const std::string summaryPath = (fs::path(outDir) / "summary.csv").string();
  writeTextFile(summaryPath, summaryCsv);
  written.push_back(summaryPath);

  json failures = json::array();
  for (const auto& failure : result.failures) {
    failures.push_back({{"experiment_id", failure.experimentId}, {"error", failure.message}});
  }
  json metadata = {{"root_seed", result.rootSeed},
                   {"log_base", result.plan.diagnostics.logBase},
                   {"alpha", result.plan.diagnostics.alpha},
                   {"beta", result.plan.diagnostics.beta},
                   {"epsilon_ideal", result.plan.diagnostics.epsilonIdeal},
                   {"std_convention", "sample (n-1)"},
                   {"tool_version", kToolVersion},
                   {"snapshot_ids", result.snapshotIds},
                   {"started_at", result.startedAt},
                   {"finished_at", result.finishedAt},
                   {"failures", failures}};
  const std::string metaPath = (fs::path(outDir) / "run_metadata.json").string();
  writeTextFile(metaPath, metadata.dump(2) + "\n");
  written.push_back(metaPath);

  const std::string planPath = (fs::path(outDir) / "plan_resolved.json").string();
  writeTextFile(planPath, planToJsonText(result.plan));
  written.push_back(planPath);

  for (const auto& outcome : result.outcomes) {
    json details;
    details["experiment_id"] = outcome.spec.experimentId;
    details["task"] = taskName(outcome.spec.task);
    details["snapshot_id"] = outcome.snapshotId;
    details["n_classes"] = outcome.numClasses;
    details["diagnostic_metric"] = outcome.diagnosticMetric;
    details["lor_class"] = lorClassName(outcome.diagnostics.lorClass);
    details["cos_class"] = cosClassName(outcome.diagnostics.cosClass);
    if (outcome.diagnostics.undefinedReason) {
      details["undefined_reason"] = undefinedReasonName(*outcome.diagnostics.undefinedReason);
    }
    details["unequal_fold_sizes"] = outcome.unequalFoldSizes;
    if (outcome.status.degenerateKind) {
      details["degenerate_kind"] = degenerateKindName(*outcome.status.degenerateKind);
    }
    json folds = json::array();
    for (const auto& fold : outcome.folds) folds.push_back(foldToJson(fold));
    details["folds"] = folds;
    const std::string detailPath =
        (fs::path(outDir) / "details" / (outcome.spec.experimentId + ".json")).string();
    writeTextFile(detailPath, details.dump(2) + "\n");
    written.push_back(detailPath);
  }
  return written;
}

std::vector<std::string> writeReport(const std::string& resultsDir, const ReportFormats& formats,
                                     const std::string& outDir) {
  const PersistedRun run = readPersisted(resultsDir);
  const std::string target = outDir.empty() ? resultsDir : outDir;
  std::error_code ec;
  fs::create_directories(fs::path(target) / "plots", ec);
  std::vector<std::string> written;

  // Mixed metric sets make cross-experiment comparison unfair; say so.
  std::vector<std::string> warnings;
  {
    std::set<std::string> metricSets;
    for (const auto& spec : run.specs) {
      std::string key;
      for (const auto& m : spec.metricNames) key += m + ",";
      metricSets.insert(key);
    }
    if (metricSets.size() > 1) {
      warnings.push_back(
          "experiments use differing metric sets; prefer one uniform metric across models for "
          "fair comparison");
    }
  }

  // Plots and appendix artifacts from the per-experiment details.
  std::vector<std::pair<std::string, std::vector<std::string>>> appendix;
  for (const auto& row : run.rows) {
    const fs::path detailPath = fs::path(resultsDir) / "details" / (row.expId + ".json");
    if (!fs::exists(detailPath)) continue;
    const json details = json::parse(readTextFile(detailPath.string()));
    std::vector<std::string> artifacts;
    const std::string task = details.at("task").get<std::string>();

    if (task == "regression") {
      std::vector<double> truth;
      std::vector<double> preds;
      for (const auto& fold : details.at("folds")) {
        for (const auto& v : fold.at("test_true_values")) truth.push_back(v.get<double>());
        for (const auto& v : fold.at("test_predictions")) preds.push_back(v.get<double>());
      }
      SvgAxes axes{row.expId + ": predictions vs true values", "true value", "predicted value"};
      const std::string path =
          (fs::path(target) / "plots" / (row.expId + "_pred_vs_true.svg")).string();
      writeTextFile(path, renderScatterSvg(axes, truth, preds, true));
      written.push_back(path);
      artifacts.push_back("plots/" + row.expId + "_pred_vs_true.svg");
    } else {
      const int k = details.at("n_classes").get<int>();
      std::vector<std::vector<long long>> total(k, std::vector<long long>(k, 0));
      for (const auto& fold : details.at("folds")) {
        if (!fold.contains("test_confusion")) continue;
        const auto cm = fold.at("test_confusion").get<std::vector<std::vector<long long>>>();
        for (int i = 0; i < k; ++i) {
          for (int j = 0; j < k; ++j) total[i][j] += cm[i][j];
        }
      }
      const std::string path =
          (fs::path(target) / "plots" / (row.expId + "_confusion.md")).string();
      writeTextFile(path, "Confusion matrix (test, summed over folds) for " + row.expId +
                              "\n\n" + renderConfusionTable(total));
      written.push_back(path);
      artifacts.push_back("plots/" + row.expId + "_confusion.md");
    }

    const auto& folds = details.at("folds");
    if (!folds.empty() && folds[0].contains("trace")) {
      const auto& trace = folds[0].at("trace");
      std::vector<LossCurve> curves = {
          {"train", trace.at("train_loss").get<std::vector<double>>()},
          {"validation", trace.at("validation_loss").get<std::vector<double>>()}};
      SvgAxes axes{row.expId + ": loss vs epoch (fold 0)", "epoch", "loss"};
      const std::string path = (fs::path(target) / "plots" / (row.expId + "_loss.svg")).string();
      writeTextFile(path, renderLossCurvesSvg(axes, curves));
      written.push_back(path);
      artifacts.push_back("plots/" + row.expId + "_loss.svg");
    }
    artifacts.push_back("details/" + row.expId + ".json");
    appendix.push_back({row.expId, artifacts});
  }

  auto metadataLines = [&](bool html) {
    std::string out;
    const auto& meta = run.metadata;
    auto line = [&](const std::string& label, const std::string& value) {
      if (html) {
        out += "<li>" + label + ": " + value + "</li>\n";
      } else {
        out += "- " + label + ": " + value + "\n";
      }
    };
    if (meta.is_object()) {
      line("root seed", meta.value("root_seed", json(0)).dump());
      line("log base", meta.value("log_base", json(10.0)).dump());
      line("alpha", meta.value("alpha", json(0.5)).dump());
      line("beta", meta.value("beta", json(0.5)).dump());
      line("epsilon_ideal", meta.value("epsilon_ideal", json(0.02)).dump());
      line("std convention", meta.value("std_convention", "sample (n-1)"));
      line("tool", meta.value("tool_version", kToolVersion));
      std::string snaps;
      if (meta.contains("snapshot_ids")) {
        for (const auto& id : meta.at("snapshot_ids")) {
          if (!snaps.empty()) snaps += ", ";
          snaps += id.get<std::string>().substr(0, 12);
        }
      }
      line("snapshots", snaps.empty() ? "none" : snaps);
    }
    return out;
  };

  if (formats.markdown) {
    std::string md = "# baselab report\n\n## Run metadata\n\n" + metadataLines(false) + "\n";
    if (!run.specs.empty()) {
      md += "## Plan\n\n" + renderPlanTable(run.specs, TableFormat::Markdown) + "\n";
    }
    md += "## Results\n\n";
    if (run.rows.empty()) {
      md += "No experiments completed.\n\n";
    } else {
      md += renderResultsTable(run.rows, run.metricColumns, TableFormat::Markdown) + "\n";
    }
    if (!run.failures.empty()) {
      md += "## Failures\n\n";
      for (const auto& failure : run.failures) {
        md += "- " + failure.experimentId + ": " + failure.message + "\n";
      }
      md += "\n";
    }
    if (!warnings.empty()) {
      md += "## Warnings\n\n";
      for (const auto& warning : warnings) md += "- " + warning + "\n";
      md += "\n";
    }
    if (!appendix.empty()) {
      md += "## Appendix\n\n";
      for (const auto& [id, artifacts] : appendix) {
        md += "- " + id + ":";
        for (const auto& artifact : artifacts) md += " [" + artifact + "](" + artifact + ")";
        md += "\n";
      }
    }
    const std::string path = (fs::path(target) / "report.md").string();
    writeTextFile(path, md);
    written.push_back(path);
  }

  if (formats.csv) {
    const std::string resultsPath = (fs::path(target) / "results_table.csv").string();
    writeTextFile(resultsPath, renderResultsTable(run.rows, run.metricColumns, TableFormat::Csv));
    written.push_back(resultsPath);
    if (!run.specs.empty()) {
      const std::string planPath = (fs::path(target) / "plan_table.csv").string();
      writeTextFile(planPath, renderPlanTable(run.specs, TableFormat::Csv));
      written.push_back(planPath);
    }
  }

  if (formats.html) {
    std::string html =
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
        "<title>baselab report</title>\n<style>\n"
        "body{font-family:sans-serif;margin:24px}\n"
        "table{border-collapse:collapse;margin:12px 0}\n"
        "td,th{border:1px solid #999;padding:4px 8px;font-size:14px}\n"
        "tr.row-red{background:#f6c8c8}\n"
        "tr.row-yellow{background:#f7eebc}\n"
        "tr.row-green{background:#c9e8c9}\n"
        "</style>\n</head>\n<body>\n<h1>baselab report</h1>\n";
    html += "<h2>Run metadata</h2>\n<ul>\n" + metadataLines(true) + "</ul>\n";
    if (!run.specs.empty()) {
      html += "<h2>Plan</h2>\n" + renderPlanTable(run.specs, TableFormat::Html);
    }
    html += "<h2>Results</h2>\n";
    if (run.rows.empty()) {
      html += "<p>No experiments completed.</p>\n";
    } else {
      html += renderResultsTable(run.rows, run.metricColumns, TableFormat::Html);
    }
    if (!run.failures.empty()) {
      html += "<h2>Failures</h2>\n<ul>\n";
      for (const auto& failure : run.failures) {
        html += "<li>" + failure.experimentId + ": " + failure.message + "</li>\n";
      }
      html += "</ul>\n";
    }
    if (!warnings.empty()) {
      html += "<h2>Warnings</h2>\n<ul>\n";
      for (const auto& warning : warnings) html += "<li>" + warning + "</li>\n";
      html += "</ul>\n";
    }
    html += "</body>\n</html>\n";
    const std::string path = (fs::path(target) / "report.html").string();
    writeTextFile(path, html);
    written.push_back(path);
  }

  return written;
}

}  // namespace baselab
