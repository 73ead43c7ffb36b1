#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "secflow/datagen.hpp"
#include "secflow/decision.hpp"
#include "secflow/detection.hpp"
#include "secflow/execution.hpp"
#include "secflow/rl.hpp"
#include "secflow/scheduling.hpp"
#include "secflow/severity.hpp"

namespace secflow {

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

enum class WorkflowClass { Small, Medium, Large };
inline constexpr std::array<WorkflowClass, 3> kAllWorkflowClasses = {WorkflowClass::Small, WorkflowClass::Medium,
                                                                     WorkflowClass::Large};
std::string_view to_string(WorkflowClass cls);
WorkflowClass parse_workflow_class(std::string_view name);
/// Inclusive task-count range of a class.
std::pair<std::size_t, std::size_t> task_range(WorkflowClass cls);

/// Random series-parallel DAG with one entry and one exit task. Some parallel
/// splits become exclusive (conditional) branches, and some control edges
/// carry a data edge. Tenant-level action parameters are instantiated from a
/// reference cost: the mean time and price of the task's eligible services in
/// `cloud`, or the midpoints of the generator ranges without one.
Workflow generate_workflow_class(WorkflowClass cls, std::uint64_t seed, const MultiCloud* cloud = nullptr);

/// 5 providers with 3 services each. Response time and price are inversely
/// related, with the fastest about 3x faster and 3x pricier than the slowest.
MultiCloud generate_multicloud(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

enum class DetectionMode { Models, AlwaysDetect, NeverDetect };
std::string_view to_string(DetectionMode mode);
DetectionMode parse_detection_mode(std::string_view name);

struct Detectors {
  const DetectorModel* ntd = nullptr;
  const DetectorModel* clf = nullptr;
  const SeverityModel* severity = nullptr;
};

struct SimulationSettings {
  TenantConfig tenant;
  UncertaintyConfig uncertainty;
  double attack_rate = 0.3;
  GeneratorOptions telemetry;
  DetectionMode mode = DetectionMode::Models;
  double trust_beta = kDefaultTrustBeta;

  void validate() const;
};

struct RunResult {
  std::size_t instance = 0;
  Totals totals;
  Totals nominal;
  std::size_t injected = 0;
  std::size_t detected = 0;  // detections of injected attacks
  std::size_t false_alarms = 0;
  std::size_t adapted = 0;
  std::size_t unmitigated = 0;
  std::size_t failed = 0;
  std::vector<AuditRecord> audits;
  std::vector<LedgerEntry> ledger;
  std::vector<TaskStatus> status;
};

/// Callbacks into one instance's execution.
class InstanceObserver {
 public:
  virtual ~InstanceObserver() = default;
  /// Before an above-threshold decision is taken.
  virtual void on_decision_point(const ExecutionState& /*state*/, const AttackEvent& /*event*/) {}
  virtual void on_applied(std::size_t /*decision*/, const AdaptationDecision& /*d*/, const AppliedAction& /*a*/) {}
  /// Value lost to a task failure caused by an earlier decision's Skip.
  virtual void on_downstream_loss(std::size_t /*decision*/, double /*value*/) {}
  virtual void on_instance_end(const RunResult& /*result*/) {}
};

/// Executes one scheduled instance. Reads trust from a snapshot taken on
/// entry and writes every update into `trust`, so the caller sees them only
/// after the instance. Throws before execution on an invalid plan or when
/// the detectors do not fit the detection mode.
RunResult run_instance(const Workflow& workflow, const SchedulingPlan& plan, const MultiCloud& cloud,
                       const Detectors& detectors, const SimulationSettings& settings, TrustRepository& trust,
                       ActionPolicy* policy, InstanceObserver* observer, std::size_t instance, std::uint64_t seed);

/// Low/Medium/High tercile of a hidden intensity.
SeverityLevel intensity_tercile(double intensity);

// ---------------------------------------------------------------------------
// Adaptive strategy
// ---------------------------------------------------------------------------

/// Q-learning policy driving the Adaptive strategy inside the simulator.
/// Per-step reward is the weighted, min-max normalised realised attributes
/// of the chosen action against its candidate set; the last step of an
/// instance also receives the normalised instance totals against the running
/// range seen so far. Updates are applied in decision order when the instance ends.
class QLearningPolicy : public ActionPolicy, public InstanceObserver {
 public:
  QLearningPolicy(QTable& table, Discretization disc, RewardWeights weights, bool learn, std::uint64_t seed);

  void begin_episode(std::size_t episode);
  ActionKind choose(const AttackEvent& event, const std::vector<CandidateCost>& candidates) override;

  void on_decision_point(const ExecutionState& state, const AttackEvent& event) override;
  void on_applied(std::size_t decision, const AdaptationDecision& d, const AppliedAction& a) override;
  void on_downstream_loss(std::size_t decision, double value) override;
  void on_instance_end(const RunResult& result) override;

  double epsilon() const { return epsilon_; }
  const Discretization& discretization() const { return disc_; }

 private:
  struct Transition {
    std::string state;
    int action = 0;
    std::vector<int> candidates;
    RewardAttributes lo;
    RewardAttributes hi;
    RewardAttributes realised;
  };

  QTable* table_;
  Discretization disc_;
  RewardWeights weights_;
  bool learn_;
  Rng explore_;
  double epsilon_ = 0.0;
  std::string pending_state_;
  std::vector<Transition> steps_;
  bool have_range_ = false;
  RewardAttributes run_lo_;
  RewardAttributes run_hi_;
};

StateKey state_key(const ExecutionState& state, const AttackEvent& event, const Discretization& disc);
/// Actual over nominal time, price and value so far (1 when the nominal is 0).
std::array<double, 3> overrun_ratios(const ExecutionState& state);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::size_t n_runs = 1000;
  std::size_t window = 100;
  SimulationSettings settings;
  RLConfig rl;
  RewardWeights reward;
  /// Carry trust updates from one run into the next.
  bool persist_trust = true;
  /// LowestCost runs, on their own seed stream, that bring trust to a steady
  /// state before measurement starts. Both strategies see the same warm-up.
  std::size_t warmup_runs = 300;
  /// LowestCost runs used to fit the RL state discretisation.
  std::size_t calibration_runs = 50;
  /// Keep ledgers and audit records of every run.
  bool keep_logs = false;
  std::uint64_t seed = 42;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  Totals mean;
  Totals stddev;
  /// Mean totals per consecutive window of `window` runs.
  std::vector<Totals> windows;
  std::optional<QTable> qtable;
  TrustRepository trust;  // after the last run
};

/// Runs `n_runs` instances of a fixed workflow. Run r uses seed
/// derive_seed(seed, r), whichever strategy is configured. The plan is
/// recomputed from the current trust before every run. Trust starts from
/// `initial_trust` advanced by the warm-up runs. The Adaptive strategy learns
/// online, starting from `warm_start` when given.
ExperimentResult run_experiment(const Workflow& workflow, const MultiCloud& cloud, const Detectors& detectors,
                                const ExperimentConfig& cfg, const TrustRepository& initial_trust,
                                const QTable* warm_start = nullptr);

/// `initial_trust` after `cfg.warmup_runs` LowestCost runs.
TrustRepository warm_up_trust(const Workflow& workflow, const MultiCloud& cloud, const Detectors& detectors,
                              const ExperimentConfig& cfg, const TrustRepository& initial_trust);

/// Ratios observed at decision points of LowestCost runs.
Discretization calibrate_discretization(const Workflow& workflow, const MultiCloud& cloud, const Detectors& detectors,
                                        const ExperimentConfig& cfg, const TrustRepository& initial_trust);

}  // namespace secflow
