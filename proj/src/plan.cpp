#include "baselab/plan.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

namespace baselab {

using nlohmann::json;

namespace {

constexpr int kSupportedVersion = 1;

void checkKeys(const json& obj, const std::set<std::string>& allowed, const std::string& where,
               std::vector<std::string>& problems) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.find(it.key()) == allowed.end()) {
      problems.push_back(where + ": unknown key '" + it.key() + "'");
    }
  }
}

template <class T>
std::optional<T> getField(const json& obj, const std::string& key, const char* typeName,
                          const std::string& where, std::vector<std::string>& problems) {
  if (!obj.contains(key)) return std::nullopt;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    problems.push_back(where + ": '" + key + "' must be " + typeName);
    return std::nullopt;
  }
}

SplitPlan parseCv(const json& cv, const std::string& where, std::vector<std::string>& problems,
                  bool& seedSet) {
  SplitPlan plan;
  checkKeys(cv, {"method", "k", "n_splits", "test_fraction", "shuffle", "stratified", "seed"},
            where, problems);
  if (auto method = getField<std::string>(cv, "method", "a string", where, problems)) {
    try {
      plan.method = parseSplitMethod(*method);
    } catch (const Error& e) {
      problems.push_back(where + ": " + e.what());
    }
  } else if (!cv.contains("method")) {
    problems.push_back(where + ": 'method' is required");
  }
  if (auto k = getField<int>(cv, "k", "an integer", where, problems)) plan.k = *k;
  if (auto ns = getField<int>(cv, "n_splits", "an integer", where, problems)) plan.numSplits = *ns;
  if (auto tf = getField<double>(cv, "test_fraction", "a number", where, problems)) {
    plan.testFraction = *tf;
  }
  if (auto sh = getField<bool>(cv, "shuffle", "a boolean", where, problems)) plan.shuffle = *sh;
  if (auto st = getField<bool>(cv, "stratified", "a boolean", where, problems)) {
    plan.stratified = *st;
  }
  if (auto seed = getField<std::uint64_t>(cv, "seed", "an unsigned integer", where, problems)) {
    plan.seed = *seed;
    seedSet = true;
  }
  return plan;
}

LearnerSpec parseModel(const json& model, TaskKind task, const std::string& where,
                       std::vector<std::string>& problems, bool& seedSet) {
  LearnerSpec learner;
  learner.taskKind = task;
  checkKeys(model, {"type", "hyperparameters", "seed"}, where, problems);
  if (auto type = getField<std::string>(model, "type", "a string", where, problems)) {
    try {
      learner.modelType = parseModelType(*type);
    } catch (const Error& e) {
      problems.push_back(where + ": " + e.what());
    }
  } else if (!model.contains("type")) {
    problems.push_back(where + ": 'type' is required");
  }
  if (model.contains("hyperparameters")) {
    const auto& hp = model.at("hyperparameters");
    if (!hp.is_object()) {
      problems.push_back(where + ": 'hyperparameters' must be an object of numbers");
    } else {
      for (auto it = hp.begin(); it != hp.end(); ++it) {
        if (!it.value().is_number()) {
          problems.push_back(where + ": hyperparameter '" + it.key() + "' must be a number");
          continue;
        }
        learner.hyperparameters[it.key()] = it.value().get<double>();
      }
    }
  }
  if (auto seed = getField<std::uint64_t>(model, "seed", "an unsigned integer", where, problems)) {
    learner.seed = *seed;
    seedSet = true;
  }
  return learner;
}

std::vector<PreprocessStep> parsePreprocessing(const json& arr, const std::string& where,
                                               std::vector<std::string>& problems) {
  std::vector<PreprocessStep> steps;
  if (!arr.is_array()) {
    problems.push_back(where + ": 'preprocessing' must be an array");
    return steps;
  }
  int index = 0;
  for (const auto& item : arr) {
    const std::string stepWhere = where + " preprocessing[" + std::to_string(index++) + "]";
    if (!item.is_object()) {
      problems.push_back(stepWhere + ": must be an object with 'kind' and 'scope'");
      continue;
    }
    checkKeys(item, {"kind", "scope"}, stepWhere, problems);
    PreprocessStep step;
    if (auto kind = getField<std::string>(item, "kind", "a string", stepWhere, problems)) {
      try {
        step.kind = parseTransformKind(*kind);
      } catch (const Error& e) {
        problems.push_back(stepWhere + ": " + e.what());
        continue;
      }
    } else {
      problems.push_back(stepWhere + ": 'kind' is required");
      continue;
    }
    if (auto scope = getField<std::string>(item, "scope", "a string", stepWhere, problems)) {
      try {
        step.scope = parseTransformScope(*scope);
      } catch (const Error& e) {
        problems.push_back(stepWhere + ": " + e.what());
      }
    }
    steps.push_back(step);
  }
  return steps;
}

json cvToJson(const SplitPlan& plan) {
  json cv = {{"method", splitMethodName(plan.method)},
             {"shuffle", plan.shuffle},
             {"stratified", plan.stratified},
             {"seed", plan.seed}};
  if (plan.method == SplitMethod::KFold) cv["k"] = plan.k;
  if (plan.method == SplitMethod::MonteCarlo) {
    cv["n_splits"] = plan.numSplits;
    cv["test_fraction"] = plan.testFraction;
  }
  return cv;
}

}  // namespace

PlanFile parsePlanText(const std::string& text, std::vector<std::string>& problems) {
  PlanFile plan;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    problems.push_back(std::string("plan is not valid JSON: ") + e.what());
    return plan;
  }
  if (!root.is_object()) {
    problems.push_back("plan root must be a JSON object");
    return plan;
  }
  checkKeys(root, {"version", "defaults", "experiments"}, "plan", problems);

  if (auto version = getField<int>(root, "version", "an integer", "plan", problems)) {
    plan.version = *version;
    if (*version != kSupportedVersion) {
      problems.push_back("unsupported plan version " + std::to_string(*version) +
                         " (supported: " + std::to_string(kSupportedVersion) + ")");
    }
  } else if (!root.contains("version")) {
    problems.push_back("plan: 'version' is required");
  }

  if (root.contains("defaults")) {
    const auto& defaults = root.at("defaults");
    if (!defaults.is_object()) {
      problems.push_back("plan: 'defaults' must be an object");
    } else {
      checkKeys(defaults, {"seed", "alpha", "beta", "epsilon_ideal", "log_base"}, "defaults",
                problems);
      if (auto seed = getField<std::uint64_t>(defaults, "seed", "an unsigned integer", "defaults",
                                              problems)) {
        plan.defaultSeed = *seed;
      }
      if (auto alpha = getField<double>(defaults, "alpha", "a number", "defaults", problems)) {
        plan.diagnostics.alpha = *alpha;
      }
      if (auto beta = getField<double>(defaults, "beta", "a number", "defaults", problems)) {
        plan.diagnostics.beta = *beta;
      }
      if (auto eps = getField<double>(defaults, "epsilon_ideal", "a number", "defaults",
                                      problems)) {
        plan.diagnostics.epsilonIdeal = *eps;
      }
      if (auto base = getField<double>(defaults, "log_base", "a number", "defaults", problems)) {
        plan.diagnostics.logBase = *base;
      }
      if (!(plan.diagnostics.alpha > 0.0) || !(plan.diagnostics.beta > 0.0)) {
        problems.push_back("defaults: alpha and beta must be positive");
      }
      if (!(plan.diagnostics.logBase > 0.0) || plan.diagnostics.logBase == 1.0) {
        problems.push_back("defaults: log_base must be positive and not 1");
      }
      if (!(plan.diagnostics.epsilonIdeal >= 0.0)) {
        problems.push_back("defaults: epsilon_ideal must be >= 0");
      }
    }
  }

  if (!root.contains("experiments") || !root.at("experiments").is_array()) {
    problems.push_back("plan: 'experiments' must be a non-empty array");
    return plan;
  }
  const auto& experiments = root.at("experiments");
  if (experiments.empty()) {
    problems.push_back("plan: 'experiments' must be a non-empty array");
    return plan;
  }

  std::set<std::string> seenIds;
  int index = 0;
  for (const auto& entry : experiments) {
    const std::string fallback = "experiments[" + std::to_string(index++) + "]";
    PlanExperiment planExp;
    if (!entry.is_object()) {
      problems.push_back(fallback + ": must be an object");
      continue;
    }
    auto id = getField<std::string>(entry, "id", "a string", fallback, problems);
    const std::string where = id && !id->empty() ? "experiment '" + *id + "'" : fallback;
    checkKeys(entry, {"id", "task", "dataset", "preprocessing", "model", "metrics", "cv", "notes"},
              where, problems);
    if (id) {
      planExp.spec.experimentId = *id;
      if (!seenIds.insert(*id).second) {
        problems.push_back("duplicate experiment id '" + *id + "'");
      }
    } else if (!entry.contains("id")) {
      problems.push_back(fallback + ": 'id' is required");
    }

    if (auto task = getField<std::string>(entry, "task", "a string", where, problems)) {
      try {
        planExp.spec.task = parseTask(*task);
      } catch (const Error& e) {
        problems.push_back(where + ": " + e.what());
      }
    } else if (!entry.contains("task")) {
      problems.push_back(where + ": 'task' is required");
    }

    if (auto dataset = getField<std::string>(entry, "dataset", "a string", where, problems)) {
      planExp.spec.datasetRef = *dataset;
    } else if (!entry.contains("dataset")) {
      problems.push_back(where + ": 'dataset' is required");
    }

    if (entry.contains("preprocessing")) {
      planExp.spec.preprocessing = parsePreprocessing(entry.at("preprocessing"), where, problems);
    }

    if (entry.contains("model") && entry.at("model").is_object()) {
      planExp.spec.learner = parseModel(entry.at("model"), planExp.spec.task, where, problems,
                                        planExp.modelSeedSet);
    } else {
      problems.push_back(where + ": 'model' object is required");
    }

    if (auto metrics =
            getField<std::vector<std::string>>(entry, "metrics", "an array of strings", where,
                                               problems)) {
      planExp.spec.metricNames = *metrics;
    } else if (!entry.contains("metrics")) {
      problems.push_back(where + ": 'metrics' is required");
    }

    if (entry.contains("cv") && entry.at("cv").is_object()) {
      planExp.spec.splitPlan = parseCv(entry.at("cv"), where, problems, planExp.cvSeedSet);
    } else {
      problems.push_back(where + ": 'cv' object is required");
    }

    if (auto notes = getField<std::string>(entry, "notes", "a string", where, problems)) {
      planExp.spec.notes = *notes;
    }

    for (const auto& p : validateExperimentSpec(planExp.spec)) {
      problems.push_back(where + ": " + p);
    }
    plan.experiments.push_back(std::move(planExp));
  }
  return plan;
}

PlanFile loadPlan(const std::string& path, std::vector<std::string>& problems) {
  return parsePlanText(readTextFile(path), problems);
}

std::string planToJsonText(const PlanFile& plan) {
  json experiments = json::array();
  for (const auto& planExp : plan.experiments) {
    const auto& spec = planExp.spec;
    json preprocessing = json::array();
    for (const auto& step : spec.preprocessing) {
      preprocessing.push_back(
          {{"kind", transformKindName(step.kind)}, {"scope", transformScopeName(step.scope)}});
    }
    json hp = json::object();
    for (const auto& [name, value] : spec.learner.hyperparameters) hp[name] = value;
    experiments.push_back({{"id", spec.experimentId},
                           {"task", taskName(spec.task)},
                           {"dataset", spec.datasetRef},
                           {"preprocessing", preprocessing},
                           {"model",
                            {{"type", modelTypeName(spec.learner.modelType)},
                             {"hyperparameters", hp},
                             {"seed", spec.learner.seed}}},
                           {"metrics", spec.metricNames},
                           {"cv", cvToJson(spec.splitPlan)},
                           {"notes", spec.notes}});
  }
  json root = {{"version", plan.version},
               {"defaults",
                {{"seed", plan.defaultSeed.value_or(0)},
                 {"alpha", plan.diagnostics.alpha},
                 {"beta", plan.diagnostics.beta},
                 {"epsilon_ideal", plan.diagnostics.epsilonIdeal},
                 {"log_base", plan.diagnostics.logBase}}},
               {"experiments", experiments}};
  return root.dump(2) + "\n";
}

}  // namespace baselab
