#pragma once

#include <optional>
#include <string>
#include <vector>

#include "secflow/execution.hpp"
#include "secflow/model.hpp"
#include "secflow/rng.hpp"
#include "secflow/scheduling.hpp"
#include "secflow/scoring.hpp"
#include "secflow/serialize.hpp"

namespace secflow {

struct BackupChoice {
  std::string service_id;
  BackupParams params;
};

/// Cheapest eligible service other than `current`; for CLF detections the
/// current provider's services are excluded too. Ties go to the smaller id.
/// Throws NoBackup on an empty pool.
BackupChoice find_backup_service(const Task& task, const Service& current, const MultiCloud& cloud,
                                 const AttackEvent& event);

/// MA_level(type) intersected with the task's feasible actions, in declaration order.
std::vector<ActionKind> final_candidates(const AttackSpec& spec, SeverityLevel level, const Task& task);

/// Chooses among costed candidates on behalf of the Adaptive strategy.
class ActionPolicy {
 public:
  virtual ~ActionPolicy() = default;
  virtual ActionKind choose(const AttackEvent& event, const std::vector<CandidateCost>& candidates) = 0;
};

struct AdaptationDecision {
  ActionKind kind = ActionKind::Skip;
  ActionParams params;
  ActionLevel level = ActionLevel::Tenant;
  std::vector<CandidateCost> candidates;
  double score = 0.0;
  std::optional<BackupChoice> backup;
};

enum class SelectionStatus { BelowThreshold, Unmitigable, Selected };

struct SelectionOutcome {
  SelectionStatus status = SelectionStatus::BelowThreshold;
  double score = 0.0;
  std::vector<ActionKind> final_candidates;
  std::optional<AdaptationDecision> decision;
};

struct DecisionInputs {
  const Task* task = nullptr;
  const Service* service = nullptr;
  TaskCost cost;  // the task's figures on its bound service
  AttackEvent event;
  const AttackSpec* spec = nullptr;
  const TenantConfig* cfg = nullptr;
  const MultiCloud* cloud = nullptr;
  double afr = 0.0;  // live rate for (service, event type)
  OverheadFractions overheads;
};

/// Trigger check, candidate intersection, backup resolution and ranking.
/// Lowest-Cost takes the minimum adaptation cost (ties: higher mitigation
/// score, then declaration order). Adaptive defers to `policy`, which must
/// be non-null and must return one of the candidates (else Selection).
SelectionOutcome select_action(const DecisionInputs& in, ActionPolicy* policy);

/// What an application appended, plus the realised multipliers on the
/// nominal price and time overheads (noise, lateness) and the change in the
/// instance makespan so far.
struct AppliedAction {
  LedgerEntry entry;
  double price_factor = 1.0;
  double time_factor = 1.0;
  double makespan_delta = 0.0;
};

/// Tenant-level application: Skip, Switch or Insert.
/// Throws InvalidArgument for middleware kinds.
AppliedAction apply_tenant_action(ExecutionState& state, std::size_t task, const AdaptationDecision& decision,
                                  const TaskCost& cost, const UncertaintyConfig& unc, Rng& noise);

/// Middleware-level application: Rework, Redundancy or Reconfiguration.
/// Reconfiguration scales the live AFR of (service, type); all three record a
/// detected violation for the original service in `trust`.
/// Throws NoBackup when Rework/Redundancy lack a backup.
AppliedAction apply_middleware_action(ExecutionState& state, std::size_t task, const AdaptationDecision& decision,
                                      const TaskCost& cost, const AttackEvent& event, TrustRepository& trust,
                                      const UncertaintyConfig& unc, Rng& noise, double beta = kDefaultTrustBeta);

struct AuditRecord {
  std::size_t instance = 0;
  std::string task;
  AttackType type = AttackType::DoS;
  SeverityLevel severity = SeverityLevel::Low;
  double score = 0.0;
  std::vector<CandidateCost> candidates;
  ActionKind chosen = ActionKind::Skip;
  ActionLevel level = ActionLevel::Tenant;
  LedgerEntry applied;
};

Json audit_to_json(const AuditRecord& record);

}  // namespace secflow
