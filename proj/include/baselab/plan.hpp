#pragma once

#include <optional>
#include <string>
#include <vector>

#include "baselab/experiment.hpp"
#include "baselab/metrics.hpp"

namespace baselab {

struct PlanExperiment {
  ExperimentSpec spec;
  bool cvSeedSet = false;
  bool modelSeedSet = false;
};

// Parsed plan file (JSON, versioned). Mirrors one planning-table row per
// experiment entry.
struct PlanFile {
  int version = 1;
  std::optional<std::uint64_t> defaultSeed;
  DiagnosticsConfig diagnostics;
  std::vector<PlanExperiment> experiments;
};

// Collects every schema violation instead of stopping at the first.
PlanFile parsePlanText(const std::string& text, std::vector<std::string>& problems);
PlanFile loadPlan(const std::string& path, std::vector<std::string>& problems);

std::string planToJsonText(const PlanFile& plan);

}  // namespace baselab
