#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "secflow/model.hpp"

namespace secflow {

enum class TaskStatus { Pending, Running, Done, Skipped, Failed, Bypassed };
std::string_view to_string(TaskStatus status);

/// Overhead uncertainty applied when adaptations are executed.
struct UncertaintyConfig {
  /// Rework time is multiplied by this when the instance is running late.
  double rework_late_multiplier = 1.5;
  /// "Late" means elapsed time above this multiple of the nominal time so far.
  double late_ratio = 1.2;
  /// Failure probability added per degraded input.
  double skip_failure_delta = 0.2;
  /// Lognormal sigma of the mean-one noise on adaptation overheads.
  double overhead_sigma = 0.25;
  /// Live AFR multiplier applied by Reconfiguration.
  double reconfig_afr_factor = 0.5;

  /// Throws Config on multipliers below 1 or probabilities outside [0, 1].
  void validate() const;
};

/// One additive contribution to the instance totals.
struct LedgerEntry {
  std::size_t task = 0;
  std::string source;  // "run", an action name, "damage" or "failure"
  double price = 0.0;
  double time = 0.0;
  double value = 0.0;
  double mitigation = 0.0;
  /// Time of a deferred entry runs after the task, off the critical path of
  /// its successors; it only extends the makespan.
  bool deferred = false;
};

struct Totals {
  double price = 0.0;
  double time = 0.0;
  double value = 0.0;
  double mitigation = 0.0;
};

/// Mutable state of one workflow instance. Totals are always a fold of the
/// ledger: price, value and mitigation add up, time is the critical path over
/// per-task durations plus deferred tails.
class ExecutionState {
 public:
  explicit ExecutionState(const Workflow& workflow);

  const Workflow& workflow() const { return *workflow_; }
  TaskStatus status(std::size_t task) const { return status_.at(task); }
  /// Throws InvalidArgument on an illegal transition.
  void set_status(std::size_t task, TaskStatus next);

  int degraded_inputs(std::size_t task) const { return degraded_.at(task); }
  /// Flags every data successor of `task` with one more degraded input.
  void degrade_successors(std::size_t task);

  void charge(LedgerEntry entry);
  /// Appends the adjustment that makes the task's folded (non-deferred)
  /// price/time/value equal the given figures.
  void replace(std::size_t task, const std::string& source, double price, double time, double value,
               double mitigation);

  /// Fold of the task's non-deferred entries.
  Totals task_totals(std::size_t task) const;
  double deferred_time(std::size_t task) const;
  const std::vector<LedgerEntry>& ledger() const { return ledger_; }

  /// Baseline figures of executed tasks before any adaptation or damage.
  void record_nominal(std::size_t task, double price, double time, double value);
  Totals nominal_totals() const;

  double makespan() const;
  double nominal_makespan() const;
  Totals totals() const;

  void record_violation(ActionKind chosen) { history_.push_back(chosen); }
  void record_unmitigated() { ++unmitigated_; }
  const std::vector<ActionKind>& action_history() const { return history_; }
  std::size_t violation_count() const { return history_.size() + unmitigated_; }

 private:
  const Workflow* workflow_;
  std::vector<TaskStatus> status_;
  std::vector<int> degraded_;
  std::vector<LedgerEntry> ledger_;
  std::vector<Totals> per_task_;
  std::vector<double> tail_;
  std::vector<Totals> nominal_;
  std::vector<ActionKind> history_;
  std::size_t unmitigated_ = 0;
};

}  // namespace secflow
