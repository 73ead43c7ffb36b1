#include "secflow/decision.hpp"

#include <algorithm>
#include <cmath>

#include "secflow/errors.hpp"

namespace secflow {

BackupChoice find_backup_service(const Task& task, const Service& current, const MultiCloud& cloud,
                                 const AttackEvent& event) {
  const Service* best = nullptr;
  for (const Service* s : eligible_services(task, cloud)) {
    if (s->id == current.id) continue;
    if (event.detected_in == DatasetKind::CLF && s->provider_id == current.provider_id) continue;
    // eligible_services is sorted by id, so strict < keeps the smaller id on ties.
    if (!best || s->price < best->price) best = s;
  }
  if (!best) fail(ErrorCode::NoBackup, "no backup service for task '" + task.id + "'");
  return BackupChoice{best->id, BackupParams{best->response_time, best->price}};
}

std::vector<ActionKind> final_candidates(const AttackSpec& spec, SeverityLevel level, const Task& task) {
  const auto& allowed = spec.mitigations_for(level);
  std::vector<ActionKind> out;
  for (ActionKind k : kAllActions) {
    if (std::find(allowed.begin(), allowed.end(), k) != allowed.end() && task.allows(k)) out.push_back(k);
  }
  return out;
}

SelectionOutcome select_action(const DecisionInputs& in, ActionPolicy* policy) {
  SelectionOutcome out;
  out.score = attack_score(in.task->requirements, in.spec->impact, in.afr, in.event.level);
  if (out.score <= in.cfg->adapt_trigger_threshold) return out;

  std::optional<BackupChoice> backup;
  bool backup_resolved = false;
  std::vector<std::pair<ActionKind, CostComponents>> raw;
  std::vector<ActionParams> params;
  for (ActionKind k : final_candidates(*in.spec, in.event.severity, *in.task)) {
    ActionParams p;
    if (is_tenant_level(k)) {
      p = *in.task->tenant_params(k);
    } else {
      if (k != ActionKind::Reconfiguration && !backup_resolved) {
        backup_resolved = true;
        try {
          backup = find_backup_service(*in.task, *in.service, *in.cloud, in.event);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoBackup) throw;
        }
      }
      if (k != ActionKind::Reconfiguration && !backup) continue;
      p = builtin_action_properties(k, in.cost, backup ? std::optional<BackupParams>(backup->params) : std::nullopt,
                                    in.overheads);
    }
    const double ms = mitigation_score(in.task->requirements, in.spec->impact, p.mitigation_impact);
    out.final_candidates.push_back(k);
    raw.push_back({k, CostComponents{p.price, p.time, ms, p.value}});
    params.push_back(p);
  }
  if (raw.empty()) {
    out.status = SelectionStatus::Unmitigable;
    return out;
  }

  std::vector<CandidateCost> costs = cost_breakdown(in.cfg->weights, raw);
  std::size_t chosen = 0;
  if (in.cfg->strategy == Strategy::LowestCost) {
    for (std::size_t k = 1; k < costs.size(); ++k) {
      const double diff = costs[k].total - costs[chosen].total;
      if (diff < -kNormalizeTolerance ||
          (std::abs(diff) <= kNormalizeTolerance && costs[k].raw.mitigation > costs[chosen].raw.mitigation)) {
        chosen = k;
      }
    }
  } else {
    if (!policy) fail(ErrorCode::Selection, "the adaptive strategy needs a policy");
    const ActionKind pick = policy->choose(in.event, costs);
    const auto it = std::find_if(costs.begin(), costs.end(), [pick](const CandidateCost& c) { return c.kind == pick; });
    if (it == costs.end()) fail(ErrorCode::Selection, "policy chose an action outside the candidate set");
    chosen = static_cast<std::size_t>(it - costs.begin());
  }

  AdaptationDecision d;
  d.kind = costs[chosen].kind;
  d.params = params[chosen];
  d.level = level_of(d.kind);
  d.score = out.score;
  if (d.kind == ActionKind::Rework || d.kind == ActionKind::Redundancy) d.backup = backup;
  d.candidates = std::move(costs);
  out.status = SelectionStatus::Selected;
  out.decision = std::move(d);
  return out;
}

namespace {

// Mean-one lognormal factor. Always consumes one draw so stream positions do
// not depend on sigma.
double noise_factor(Rng& rng, double sigma) {
  const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
  return std::exp(sigma * z - 0.5 * sigma * sigma);
}

double chosen_mitigation(const AdaptationDecision& d) {
  for (const auto& c : d.candidates) {
    if (c.kind == d.kind) return c.raw.mitigation;
  }
  return 0.0;
}

}  // namespace

AppliedAction apply_tenant_action(ExecutionState& state, std::size_t task, const AdaptationDecision& decision,
                                  const TaskCost& /*cost*/, const UncertaintyConfig& unc, Rng& noise) {
  if (decision.level != ActionLevel::Tenant) fail(ErrorCode::InvalidArgument, "not a tenant-level decision");
  const double ms = chosen_mitigation(decision);
  const double n = noise_factor(noise, unc.overhead_sigma);
  const std::string source(to_string(decision.kind));
  const Totals cur = state.task_totals(task);
  const double before = state.makespan();
  AppliedAction out;
  switch (decision.kind) {
    case ActionKind::Skip:
      state.replace(task, source, 0.0, 0.0, 0.0, ms);
      state.set_status(task, TaskStatus::Skipped);
      state.degrade_successors(task);
      break;
    case ActionKind::Switch: {
      // Deferred past its successors when nothing downstream consumes its data.
      const bool deferrable = state.workflow().data_successors(task).empty();
      state.charge(LedgerEntry{task, source, decision.params.price * n, decision.params.time * n,
                               decision.params.value - cur.value, ms, deferrable});
      out.price_factor = out.time_factor = n;
      break;
    }
    case ActionKind::Insert:
      state.charge(LedgerEntry{task, source, decision.params.price * n, decision.params.time * n,
                               decision.params.value, ms, false});
      out.price_factor = out.time_factor = n;
      break;
    default:
      fail(ErrorCode::InvalidArgument, "not a tenant-level action");
  }
  state.record_violation(decision.kind);
  out.entry = state.ledger().back();
  out.makespan_delta = state.makespan() - before;
  return out;
}

AppliedAction apply_middleware_action(ExecutionState& state, std::size_t task, const AdaptationDecision& decision,
                                      const TaskCost& cost, const AttackEvent& event, TrustRepository& trust,
                                      const UncertaintyConfig& unc, Rng& noise, double beta) {
  if (decision.level != ActionLevel::Middleware) fail(ErrorCode::InvalidArgument, "not a middleware-level decision");
  const double ms = chosen_mitigation(decision);
  const double n = noise_factor(noise, unc.overhead_sigma);
  const std::string source(to_string(decision.kind));
  const double before = state.makespan();
  AppliedAction out;
  out.price_factor = out.time_factor = n;
  switch (decision.kind) {
    case ActionKind::Rework: {
      if (!decision.backup) fail(ErrorCode::NoBackup, "rework lost its backup service");
      const bool late = state.makespan() > unc.late_ratio * state.nominal_makespan();
      const double mult = late ? unc.rework_late_multiplier : 1.0;
      state.charge(LedgerEntry{task, source, decision.params.price * n, decision.params.time * n * mult, 0.0, ms,
                               false});
      out.time_factor = n * mult;
      break;
    }
    case ActionKind::Redundancy:
      if (!decision.backup) fail(ErrorCode::NoBackup, "redundancy lost its backup service");
      state.charge(LedgerEntry{task, source, (decision.params.price - cost.price) * n,
                               (decision.params.time - cost.time) * n, decision.params.value - cost.value, ms, false});
      break;
    case ActionKind::Reconfiguration:
      state.charge(LedgerEntry{task, source, (decision.params.price - cost.price) * n,
                               (decision.params.time - cost.time) * n, decision.params.value - cost.value, ms, false});
      trust.set_afr(event.service_id, event.type, trust.afr(event.service_id, event.type) * unc.reconfig_afr_factor);
      break;
    default:
      fail(ErrorCode::InvalidArgument, "not a middleware-level action");
  }
  trust = update_provider_trust(std::move(trust), event.service_id, event.type, true, beta);
  state.record_violation(decision.kind);
  out.entry = state.ledger().back();
  out.makespan_delta = state.makespan() - before;
  return out;
}

Json audit_to_json(const AuditRecord& r) {
  Json candidates = Json::array();
  for (const auto& c : r.candidates) {
    candidates.push_back(Json{{"kind", std::string(to_string(c.kind))},
                              {"price", c.raw.price},
                              {"time", c.raw.time},
                              {"mitigation", c.raw.mitigation},
                              {"value", c.raw.value},
                              {"cost", c.total}});
  }
  return Json{{"instance", r.instance},
              {"task", r.task},
              {"attack_type", std::string(to_string(r.type))},
              {"severity", std::string(to_string(r.severity))},
              {"score", r.score},
              {"candidates", std::move(candidates)},
              {"chosen", std::string(to_string(r.chosen))},
              {"level", std::string(to_string(r.level))},
              {"applied", Json{{"price", r.applied.price},
                               {"time", r.applied.time},
                               {"value", r.applied.value},
                               {"mitigation", r.applied.mitigation},
                               {"deferred", r.applied.deferred}}}};
}

}  // namespace secflow
