#include "secflow/execution.hpp"

#include <algorithm>
#include <cmath>

#include "secflow/errors.hpp"

namespace secflow {

std::string_view to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::Pending: return "pending";
    case TaskStatus::Running: return "running";
    case TaskStatus::Done: return "done";
    case TaskStatus::Skipped: return "skipped";
    case TaskStatus::Failed: return "failed";
    case TaskStatus::Bypassed: return "bypassed";
  }
  return "unknown";
}

void UncertaintyConfig::validate() const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(rework_late_multiplier) || rework_late_multiplier < 1.0) {
    fail(ErrorCode::Config, "rework_late_multiplier must be >= 1");
  }
  if (!finite(late_ratio) || late_ratio < 1.0) fail(ErrorCode::Config, "late_ratio must be >= 1");
  if (!finite(skip_failure_delta) || skip_failure_delta < 0.0 || skip_failure_delta > 1.0) {
    fail(ErrorCode::Config, "skip_failure_delta must lie in [0, 1]");
  }
  if (!finite(overhead_sigma) || overhead_sigma < 0.0) fail(ErrorCode::Config, "overhead_sigma must be >= 0");
  if (!finite(reconfig_afr_factor) || reconfig_afr_factor < 0.0 || reconfig_afr_factor > 1.0) {
    fail(ErrorCode::Config, "reconfig_afr_factor must lie in [0, 1]");
  }
}

ExecutionState::ExecutionState(const Workflow& workflow)
    : workflow_(&workflow),
      status_(workflow.size(), TaskStatus::Pending),
      degraded_(workflow.size(), 0),
      per_task_(workflow.size()),
      tail_(workflow.size(), 0.0),
      nominal_(workflow.size()) {}

void ExecutionState::set_status(std::size_t task, TaskStatus next) {
  const TaskStatus cur = status_.at(task);
  bool ok = false;
  switch (cur) {
    case TaskStatus::Pending: ok = next == TaskStatus::Running || next == TaskStatus::Bypassed; break;
    case TaskStatus::Running:
      ok = next == TaskStatus::Done || next == TaskStatus::Skipped || next == TaskStatus::Failed;
      break;
    default: break;
  }
  if (!ok) {
    fail(ErrorCode::InvalidArgument, "task '" + workflow_->task(task).id + "' cannot move from " +
                                         std::string(to_string(cur)) + " to " + std::string(to_string(next)));
  }
  status_[task] = next;
}

void ExecutionState::degrade_successors(std::size_t task) {
  for (std::size_t s : workflow_->data_successors(task)) ++degraded_[s];
}

void ExecutionState::charge(LedgerEntry entry) {
  if (entry.task >= status_.size()) fail(ErrorCode::InvalidArgument, "ledger entry names an unknown task");
  Totals& t = per_task_[entry.task];
  t.price += entry.price;
  t.value += entry.value;
  t.mitigation += entry.mitigation;
  if (entry.deferred) {
    tail_[entry.task] += entry.time;
  } else {
    t.time += entry.time;
  }
  ledger_.push_back(std::move(entry));
}

void ExecutionState::replace(std::size_t task, const std::string& source, double price, double time, double value,
                             double mitigation) {
  const Totals cur = per_task_.at(task);
  charge(LedgerEntry{task, source, price - cur.price, time - cur.time, value - cur.value, mitigation, false});
}

Totals ExecutionState::task_totals(std::size_t task) const { return per_task_.at(task); }

double ExecutionState::deferred_time(std::size_t task) const { return tail_.at(task); }

void ExecutionState::record_nominal(std::size_t task, double price, double time, double value) {
  nominal_.at(task) = Totals{price, time, value, 0.0};
}

Totals ExecutionState::nominal_totals() const {
  Totals out;
  for (const auto& n : nominal_) {
    out.price += n.price;
    out.value += n.value;
  }
  out.time = nominal_makespan();
  return out;
}

namespace {

double critical_path(const Workflow& wf, const std::vector<Totals>& per_task, const std::vector<double>* tail) {
  std::vector<double> finish(wf.size(), 0.0);
  double makespan = 0.0;
  for (std::size_t i : wf.topological_order()) {
    double start = 0.0;
    for (std::size_t e : wf.incoming(i)) {
      start = std::max(start, finish[wf.index_of(wf.control_edges()[e].from)]);
    }
    finish[i] = start + per_task[i].time;
    makespan = std::max(makespan, finish[i] + (tail ? (*tail)[i] : 0.0));
  }
  return makespan;
}

}  // namespace

double ExecutionState::makespan() const { return critical_path(*workflow_, per_task_, &tail_); }

double ExecutionState::nominal_makespan() const { return critical_path(*workflow_, nominal_, nullptr); }

Totals ExecutionState::totals() const {
  Totals out;
  for (const auto& t : per_task_) {
    out.price += t.price;
    out.value += t.value;
    out.mitigation += t.mitigation;
  }
  out.time = makespan();
  return out;
}

}  // namespace secflow
