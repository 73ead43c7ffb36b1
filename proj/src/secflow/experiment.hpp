#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "secflow/datagen.hpp"
#include "secflow/detection.hpp"
#include "secflow/rl.hpp"
#include "secflow/serialize.hpp"
#include "secflow/severity.hpp"
#include "secflow/sim.hpp"

namespace secflow {

// ---------------------------------------------------------------------------
// Model bundle
// ---------------------------------------------------------------------------

inline constexpr int kBundleVersion = 1;

/// Detectors and severity model shipped together as one versioned document.
struct ModelBundle {
  std::optional<DetectorModel> ntd;
  std::optional<DetectorModel> clf;
  std::optional<SeverityModel> severity;

  Detectors view() const;
};

Json bundle_to_json(const ModelBundle& bundle);
/// Throws Parse on an unknown version or a detector filed under the wrong schema.
ModelBundle bundle_from_json(const Json& doc);

struct TrainingOptions {
  std::size_t records = 10000;
  double train_fraction = 0.8;
  ForestParams forest;
  GeneratorOptions telemetry;
  KMeansOptions kmeans;
};

/// Random forests on both channels plus a severity model per channel, all on
/// freshly generated data with the default attack mix.
ModelBundle train_default_bundle(const TrainingOptions& opts, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Aggregate and comparison tables
// ---------------------------------------------------------------------------

struct AggregateRow {
  std::size_t run = 0;
  Strategy strategy = Strategy::LowestCost;
  WorkflowClass cls = WorkflowClass::Small;
  Totals totals;
  std::size_t injected = 0;
  std::size_t detected = 0;
  std::size_t adapted = 0;
  std::size_t failed = 0;
};

std::vector<AggregateRow> aggregate_rows(const ExperimentResult& result, Strategy strategy, WorkflowClass cls);
/// Columns: run, strategy, class, price, time, value, mitigation, injected, detected, adapted, failed.
void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out);
/// Throws Parse on a malformed header or row.
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);

/// Composite reward of every row: the weighted sum of min-max normalised
/// totals, with ranges pooled over all rows of the same class.
std::vector<double> composite_rewards(const std::vector<AggregateRow>& rows, const RewardWeights& weights);

struct WindowRow {
  WorkflowClass cls = WorkflowClass::Small;
  Strategy strategy = Strategy::LowestCost;
  std::size_t window = 0;  // 1-based
  std::size_t first_run = 0;
  std::size_t last_run = 0;
  Totals mean;
  double reward = 0.0;
};

/// Rolling means over consecutive windows of `window` runs, per class and strategy.
std::vector<WindowRow> window_rows(const std::vector<AggregateRow>& rows, std::size_t window,
                                   const RewardWeights& weights);
void write_window_csv(const std::vector<WindowRow>& rows, std::ostream& out);
std::vector<WindowRow> read_window_csv(std::istream& in);

/// JSON-lines log: one "adaptation" line per audit record and one "run"
/// summary line per run.
void write_event_log(const ExperimentResult& result, Strategy strategy, WorkflowClass cls, std::ostream& out);

/// Markdown summary built only from the emitted tables.
std::string render_report(const std::vector<AggregateRow>& aggregate, const std::vector<WindowRow>& windows,
                          const std::vector<std::vector<std::string>>* metrics = nullptr);

// ---------------------------------------------------------------------------
// Comparison sweep
// ---------------------------------------------------------------------------

struct Scenario {
  WorkflowClass cls = WorkflowClass::Medium;
  Workflow workflow;
  MultiCloud cloud;
  TrustRepository trust;
};

/// Cloud and workflow for one class, both derived from `seed`.
Scenario make_scenario(WorkflowClass cls, std::uint64_t seed);

struct ComparisonResult {
  std::vector<AggregateRow> aggregate;
  std::vector<WindowRow> windows;
  std::vector<QTable> qtables;  // one per class, in sweep order
};

/// Runs LowestCost and Adaptive on the same scenario and seeds for every class.
ComparisonResult run_comparison(const std::vector<WorkflowClass>& classes, const Detectors& detectors,
                                const ExperimentConfig& cfg, std::uint64_t scenario_seed);

/// Comparison of a single, already built scenario.
ComparisonResult compare_scenario(const Scenario& scenario, const Detectors& detectors, const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Settings documents
// ---------------------------------------------------------------------------

/// Everything the simulate, train-rl and compare pipelines read. A fixed
/// workflow, cloud or trust snapshot replaces the generated one.
struct RunSpec {
  ExperimentConfig experiment;
  std::vector<WorkflowClass> classes{WorkflowClass::Small, WorkflowClass::Medium, WorkflowClass::Large};
  std::uint64_t scenario_seed = 42;
  std::optional<Workflow> workflow;
  std::optional<MultiCloud> cloud;
  std::optional<TrustRepository> trust;
};

/// Throws Config on unknown keys or invalid values.
RunSpec run_spec_from_json(const Json& doc);
Json run_spec_to_json(const RunSpec& spec);

/// Scenario for `cls`, honouring the fixed parts of `spec`.
Scenario resolve_scenario(const RunSpec& spec, WorkflowClass cls);

Json uncertainty_to_json(const UncertaintyConfig& cfg);
UncertaintyConfig uncertainty_from_json(const Json& doc);
Json reward_weights_to_json(const RewardWeights& w);
RewardWeights reward_weights_from_json(const Json& doc);

}  // namespace secflow
