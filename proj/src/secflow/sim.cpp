#include "secflow/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "secflow/errors.hpp"

namespace secflow {

std::string_view to_string(WorkflowClass cls) {
  switch (cls) {
    case WorkflowClass::Small: return "small";
    case WorkflowClass::Medium: return "medium";
    case WorkflowClass::Large: return "large";
  }
  return "unknown";
}

WorkflowClass parse_workflow_class(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (WorkflowClass c : kAllWorkflowClasses) {
    if (lower == to_string(c)) return c;
  }
  fail(ErrorCode::Config, "unknown workflow class '" + std::string(name) + "'");
}

std::pair<std::size_t, std::size_t> task_range(WorkflowClass cls) {
  switch (cls) {
    case WorkflowClass::Small: return {3, 10};
    case WorkflowClass::Medium: return {10, 50};
    case WorkflowClass::Large: return {50, 100};
  }
  return {3, 10};
}

std::string_view to_string(DetectionMode mode) {
  switch (mode) {
    case DetectionMode::Models: return "models";
    case DetectionMode::AlwaysDetect: return "always";
    case DetectionMode::NeverDetect: return "never";
  }
  return "unknown";
}

DetectionMode parse_detection_mode(std::string_view name) {
  if (name == "models") return DetectionMode::Models;
  if (name == "always") return DetectionMode::AlwaysDetect;
  if (name == "never") return DetectionMode::NeverDetect;
  fail(ErrorCode::Config, "unknown detection mode '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

namespace {

constexpr double kTaskRequirementMax = 0.6;
constexpr double kServiceGuaranteeMin = 0.6;
constexpr double kAfrMin = 0.02;
constexpr double kAfrMax = 0.15;

struct DraftEdge {
  std::size_t from;
  std::size_t to;
  std::string cond;
  double prob = 0.5;
};

}  // namespace

Workflow generate_workflow_class(WorkflowClass cls, std::uint64_t seed, const MultiCloud* cloud) {
  Rng rng = make_stream(seed, "workflow");
  const auto [lo, hi] = task_range(cls);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);

  // Entry 0 and exit 1 are fixed; every other node is an expansion of node 2.
  std::vector<DraftEdge> edges{{0, 2, "", 0.5}, {2, 1, "", 0.5}};
  std::size_t count = 3;
  std::size_t groups = 0;
  while (count < n) {
    const std::size_t x = std::uniform_int_distribution<std::size_t>(2, count - 1)(rng);
    const std::size_t y = count++;
    std::vector<std::size_t> in;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].to == x) in.push_back(e);
    }
    const bool in_unconditional =
        std::all_of(in.begin(), in.end(), [&](std::size_t e) { return edges[e].cond.empty(); });
    const double op = uniform(rng, 0.0, 1.0);
    if (op < 0.5 || !in_unconditional) {
      // Series: x -> y, y takes over x's outgoing edges.
      for (auto& e : edges) {
        if (e.from == x) e.from = y;
      }
      edges.push_back({x, y, "", 0.5});
      continue;
    }
    const std::size_t n_edges = edges.size();
    for (std::size_t e = 0; e < n_edges; ++e) {
      if (edges[e].from == x) edges.push_back({y, edges[e].to, edges[e].cond, edges[e].prob});
    }
    // At most one exclusive group per source keeps branch resolution simple.
    const bool exclusive = in.size() == 1 && op > 0.85 &&
                           std::none_of(edges.begin(), edges.end(), [&](const DraftEdge& d) {
                             return d.from == edges[in[0]].from && !d.cond.empty();
                           });
    for (std::size_t e : in) {
      if (exclusive) {
        const std::string g = "g" + std::to_string(groups);
        edges[e].cond = g + ".a";
        edges.push_back({edges[e].from, y, g + ".b", 0.5});
        ++groups;
      } else {
        edges.push_back({edges[e].from, y, "", 0.5});
      }
    }
  }

  // Names follow a topological numbering so ids read naturally.
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& e : edges) ++indeg[e.to];
  std::vector<std::size_t> order;
  std::vector<std::size_t> ready{0};
  while (!ready.empty()) {
    const auto it = std::min_element(ready.begin(), ready.end());
    const std::size_t v = *it;
    ready.erase(it);
    order.push_back(v);
    for (const auto& e : edges) {
      if (e.from == v && --indeg[e.to] == 0) ready.push_back(e.to);
    }
  }
  std::vector<std::size_t> rank(n);
  for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;
  auto name = [&](std::size_t v) { return "t" + std::to_string(rank[v]); };

  const OverheadFractions overheads;
  std::vector<Task> tasks(n);
  for (std::size_t k = 0; k < n; ++k) {
    Task& t = tasks[rank[k]];
    t.id = name(k);
    t.requirements = SecurityVector{uniform(rng, 0.0, kTaskRequirementMax), uniform(rng, 0.0, kTaskRequirementMax),
                                    uniform(rng, 0.0, kTaskRequirementMax)};
    t.value = uniform(rng, 0.1, 1.0);

    TaskCost ref{25.5, 5.05, t.value};
    if (cloud) {
      const auto eligible = eligible_services(t, *cloud);
      if (!eligible.empty()) {
        ref.time = 0.0;
        ref.price = 0.0;
        for (const Service* s : eligible) {
          ref.time += s->response_time;
          ref.price += s->price;
        }
        ref.time /= static_cast<double>(eligible.size());
        ref.price /= static_cast<double>(eligible.size());
      }
    }
    std::vector<ActionKind> kinds;
    while (kinds.size() < 2) {
      kinds.clear();
      for (ActionKind a : kAllActions) {
        if (bernoulli(rng, 0.6)) kinds.push_back(a);
      }
    }
    for (ActionKind a : kinds) {
      FeasibleAction fa{a, std::nullopt};
      if (is_tenant_level(a)) fa.params = builtin_action_properties(a, ref, std::nullopt, overheads);
      t.actions.push_back(fa);
    }
  }

  std::vector<ControlEdge> control;
  std::vector<DataEdge> data;
  std::size_t items = 0;
  for (const auto& e : edges) {
    control.push_back(ControlEdge{name(e.from), name(e.to), e.cond, e.prob});
    if (bernoulli(rng, 0.4)) data.push_back(DataEdge{name(e.from), name(e.to), "d" + std::to_string(items++)});
  }
  std::sort(control.begin(), control.end(), [](const ControlEdge& a, const ControlEdge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  return Workflow(std::move(tasks), std::move(control), std::move(data), overheads);
}

MultiCloud generate_multicloud(std::uint64_t seed) {
  Rng rng = make_stream(seed, "multicloud");
  std::lognormal_distribution<double> jitter(0.0, 0.1);
  std::vector<Provider> providers;
  for (int p = 0; p < 5; ++p) {
    Provider provider{"p" + std::to_string(p), {}};
    for (int s = 0; s < 3; ++s) {
      Service svc;
      svc.id = provider.id + "s" + std::to_string(s);
      svc.provider_id = provider.id;
      svc.response_time = uniform(rng, 12.0, 36.0);
      svc.price = std::clamp(60.0 / svc.response_time * jitter(rng), 0.1, 10.0);
      svc.guarantees = SecurityVector{uniform(rng, kServiceGuaranteeMin, 1.0), uniform(rng, kServiceGuaranteeMin, 1.0),
                                      uniform(rng, kServiceGuaranteeMin, 1.0)};
      for (auto& r : svc.afr) r = uniform(rng, kAfrMin, kAfrMax);
      provider.services.push_back(svc);
    }
    providers.push_back(std::move(provider));
  }
  return MultiCloud(std::move(providers));
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

void SimulationSettings::validate() const {
  tenant.validate();
  uncertainty.validate();
  if (!(attack_rate >= 0.0 && attack_rate <= 1.0)) fail(ErrorCode::Config, "attack_rate must lie in [0, 1]");
  if (!(trust_beta >= 0.0 && trust_beta <= 1.0)) fail(ErrorCode::Config, "trust_beta must lie in [0, 1]");
}

SeverityLevel intensity_tercile(double intensity) {
  if (intensity <= 1.0 / 3.0) return SeverityLevel::Low;
  if (intensity <= 2.0 / 3.0) return SeverityLevel::Medium;
  return SeverityLevel::High;
}

namespace {

Rng task_stream(std::uint64_t seed, std::string_view name, std::size_t task) {
  return Rng(derive_seed(derive_seed(seed, name), static_cast<std::uint64_t>(task)));
}

void check_detectors(const Detectors& d, const SimulationSettings& s) {
  if (s.mode != DetectionMode::Models) return;
  if (!d.ntd && !d.clf) fail(ErrorCode::Config, "model-driven detection needs at least one detector");
  if (!d.severity) fail(ErrorCode::Config, "model-driven detection needs a severity model");
  const std::pair<const DetectorModel*, DatasetKind> channels[] = {{d.ntd, DatasetKind::NTD},
                                                                   {d.clf, DatasetKind::CLF}};
  for (const auto& [model, kind] : channels) {
    if (!model) continue;
    if (model->schema() != kind) {
      fail(ErrorCode::Config, "detector for " + std::string(to_string(kind)) + " was trained on " +
                                  std::string(to_string(model->schema())));
    }
    for (Label l : model->classes()) {
      const auto type = attack_of(l);
      if (type && !d.severity->contains(kind, *type)) {
        fail(ErrorCode::Config, "severity model lacks " + std::string(to_string(kind)) + "/" +
                                    std::string(to_string(*type)));
      }
    }
  }
}

AttackType draw_attack_type(const std::array<double, 4>& afr, Rng& rng) {
  const double total = std::accumulate(afr.begin(), afr.end(), 0.0);
  const double u = uniform(rng, 0.0, 1.0);
  if (total <= 0.0) return kAllAttackTypes[std::min<std::size_t>(3, static_cast<std::size_t>(u * 4.0))];
  double acc = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    acc += afr[k] / total;
    if (u < acc) return kAllAttackTypes[k];
  }
  return kAllAttackTypes[3];
}

}  // namespace

RunResult run_instance(const Workflow& wf, const SchedulingPlan& plan, const MultiCloud& cloud,
                       const Detectors& detectors, const SimulationSettings& settings, TrustRepository& trust,
                       ActionPolicy* policy, InstanceObserver* observer, std::size_t instance, std::uint64_t seed) {
  settings.validate();
  validate_plan(plan, wf, cloud);
  check_detectors(detectors, settings);
  if (settings.tenant.strategy == Strategy::Adaptive && !policy) {
    fail(ErrorCode::Config, "the adaptive strategy needs a policy");
  }
  const TrustRepository snapshot = trust;
  const AttackCatalog& catalog = builtin_attack_catalog();
  const UncertaintyConfig& unc = settings.uncertainty;

  ExecutionState state(wf);
  RunResult result;
  result.instance = instance;
  std::vector<bool> edge_active(wf.control_edges().size(), false);
  // Decisions (audit indices) whose Skip degraded each task's inputs; -1 marks damage.
  std::vector<std::vector<long>> degrade_sources(wf.size());
  auto degrade = [&](std::size_t task, const std::vector<long>& sources) {
    state.degrade_successors(task);
    for (std::size_t s : wf.data_successors(task)) {
      degrade_sources[s].insert(degrade_sources[s].end(), sources.begin(), sources.end());
    }
  };

  for (std::size_t i : wf.topological_order()) {
    const Task& task = wf.task(i);
    const auto& incoming = wf.incoming(i);
    const bool runs = incoming.empty() ||
                      std::any_of(incoming.begin(), incoming.end(), [&](std::size_t e) { return edge_active[e]; });
    if (!runs) {
      state.set_status(i, TaskStatus::Bypassed);
      continue;
    }
    state.set_status(i, TaskStatus::Running);
    const Service& svc = cloud.service(plan.service_for(task.id));
    const TaskCost cost{svc.response_time, svc.price, task.value};
    state.charge(LedgerEntry{i, "run", cost.price, cost.time, cost.value, 0.0, false});
    state.record_nominal(i, cost.price, cost.time, cost.value);

    // Injection: a fixed number of draws per task keeps streams aligned.
    Rng inject = task_stream(seed, "sim.inject", i);
    const bool attacked = bernoulli(inject, settings.attack_rate);
    std::array<double, 4> live_afr{};
    for (AttackType t : kAllAttackTypes) live_afr[index_of(t)] = snapshot.afr(svc.id, t);
    const AttackType true_type = draw_attack_type(live_afr, inject);
    const double intensity = uniform_open_closed(inject);
    if (attacked) ++result.injected;

    Rng telemetry = task_stream(seed, "sim.telemetry", i);
    const Label label = attacked ? label_of(true_type) : Label::Normal;
    const double shown = attacked ? intensity : 0.0;
    const TelemetryRecord ntd = synthesize_record(DatasetKind::NTD, label, shown, telemetry, settings.telemetry);
    const TelemetryRecord clf = synthesize_record(DatasetKind::CLF, label, shown, telemetry, settings.telemetry);

    std::optional<AttackEvent> event;
    const TelemetryRecord* evidence = nullptr;
    switch (settings.mode) {
      case DetectionMode::Models: {
        const std::pair<const DetectorModel*, const TelemetryRecord*> channels[] = {{detectors.ntd, &ntd},
                                                                                    {detectors.clf, &clf}};
        for (const auto& [model, record] : channels) {
          if (!model) continue;
          const auto type = attack_of(model->predict(record->features));
          if (!type) continue;
          AttackEvent ev;
          ev.type = *type;
          ev.detected_in = model->schema();
          ev.task_id = task.id;
          ev.service_id = svc.id;
          event = ev;
          evidence = record;
          break;
        }
        break;
      }
      case DetectionMode::AlwaysDetect:
        if (attacked) {
          AttackEvent ev;
          ev.type = true_type;
          ev.detected_in = DatasetKind::NTD;
          ev.task_id = task.id;
          ev.service_id = svc.id;
          event = ev;
        }
        break;
      case DetectionMode::NeverDetect:
        break;
    }

    bool contained = false;
    if (event && !attacked) {
      // False alarms are logged and counted but never acted upon.
      ++result.false_alarms;
      event.reset();
    }
    if (event) {
      ++result.detected;
      if (evidence) {
        const auto [level, l] = detectors.severity->assess(event->detected_in, event->type, evidence->features);
        event->severity = level;
        event->level = l;
      } else {
        event->severity = intensity_tercile(intensity);
        event->level = numeric_level(event->severity);
      }
      const AttackSpec& spec = catalog.at(event->type);
      DecisionInputs in;
      in.task = &task;
      in.service = &svc;
      in.cost = cost;
      in.event = *event;
      in.spec = &spec;
      in.cfg = &settings.tenant;
      in.cloud = &cloud;
      in.afr = snapshot.afr(svc.id, event->type);
      in.overheads = wf.overheads();
      const double score = attack_score(task.requirements, spec.impact, in.afr, event->level);
      if (score > settings.tenant.adapt_trigger_threshold && observer) observer->on_decision_point(state, *event);
      const SelectionOutcome outcome = select_action(in, policy);
      bool trust_recorded = false;
      switch (outcome.status) {
        case SelectionStatus::BelowThreshold:
          contained = true;
          break;
        case SelectionStatus::Unmitigable:
          ++result.unmitigated;
          state.record_unmitigated();
          break;
        case SelectionStatus::Selected: {
          const AdaptationDecision& d = *outcome.decision;
          Rng noise = task_stream(seed, "sim.noise", i);
          AppliedAction applied;
          if (d.level == ActionLevel::Tenant) {
            applied = apply_tenant_action(state, i, d, cost, unc, noise);
          } else {
            applied = apply_middleware_action(state, i, d, cost, *event, trust, unc, noise, settings.trust_beta);
            trust_recorded = true;
          }
          const std::size_t index = result.audits.size();
          if (d.kind == ActionKind::Skip) {
            for (std::size_t s : wf.data_successors(i)) degrade_sources[s].push_back(static_cast<long>(index));
          }
          AuditRecord audit;
          audit.instance = instance;
          audit.task = task.id;
          audit.type = event->type;
          audit.severity = event->severity;
          audit.score = outcome.score;
          audit.candidates = d.candidates;
          audit.chosen = d.kind;
          audit.level = d.level;
          audit.applied = applied.entry;
          result.audits.push_back(std::move(audit));
          ++result.adapted;
          if (observer) observer->on_applied(index, d, applied);
          contained = true;
          break;
        }
      }
      // Every confirmed detection is a violation of the bound service.
      if (!trust_recorded) {
        trust = update_provider_trust(std::move(trust), svc.id, event->type, true, settings.trust_beta);
      }
    } else {
      for (AttackType t : kAllAttackTypes) {
        trust = update_provider_trust(std::move(trust), svc.id, t, false, settings.trust_beta);
      }
    }

    if (attacked && !contained) {
      const double l = numeric_level(intensity_tercile(intensity));
      const double harm = attack_score(task.requirements, catalog.at(true_type).impact, live_afr[index_of(true_type)], l);
      const double loss = state.task_totals(i).value * harm;
      state.charge(LedgerEntry{i, "damage", 0.0, 0.0, -loss, 0.0, false});
      degrade(i, {-1});
    }

    if (state.status(i) == TaskStatus::Running) {
      Rng failure = task_stream(seed, "sim.failure", i);
      const double p = std::min(1.0, unc.skip_failure_delta * state.degraded_inputs(i));
      if (bernoulli(failure, p)) {
        const double lost = state.task_totals(i).value;
        state.charge(LedgerEntry{i, "failure", 0.0, 0.0, -lost, 0.0, false});
        state.set_status(i, TaskStatus::Failed);
        ++result.failed;
        std::vector<long> causes;
        for (long s : degrade_sources[i]) {
          if (s >= 0) causes.push_back(s);
        }
        if (observer && !causes.empty()) {
          for (long s : causes) observer->on_downstream_loss(static_cast<std::size_t>(s), lost / causes.size());
        }
        degrade(i, degrade_sources[i].empty() ? std::vector<long>{-1} : degrade_sources[i]);
      } else {
        state.set_status(i, TaskStatus::Done);
      }
    }

    // Branch resolution for outgoing control edges.
    Rng branch = task_stream(seed, "sim.branch", i);
    std::map<std::string, std::vector<std::size_t>> groups;
    std::vector<std::size_t> conditional;
    for (std::size_t e : wf.outgoing(i)) {
      if (wf.control_edges()[e].cond.empty()) {
        edge_active[e] = true;
      } else {
        conditional.push_back(e);
      }
    }
    if (conditional.size() == 1) {
      edge_active[conditional[0]] = bernoulli(branch, wf.control_edges()[conditional[0]].prob);
    } else if (conditional.size() > 1) {
      double total = 0.0;
      for (std::size_t e : conditional) total += wf.control_edges()[e].prob;
      double u = uniform(branch, 0.0, 1.0) * (total > 0.0 ? total : static_cast<double>(conditional.size()));
      std::size_t pick = conditional.back();
      for (std::size_t e : conditional) {
        u -= total > 0.0 ? wf.control_edges()[e].prob : 1.0;
        if (u < 0.0) {
          pick = e;
          break;
        }
      }
      edge_active[pick] = true;
    }
  }

  result.totals = state.totals();
  result.nominal = state.nominal_totals();
  result.ledger = state.ledger();
  for (std::size_t k = 0; k < wf.size(); ++k) result.status.push_back(state.status(k));
  if (observer) observer->on_instance_end(result);
  return result;
}

// ---------------------------------------------------------------------------
// Adaptive strategy
// ---------------------------------------------------------------------------

std::array<double, 3> overrun_ratios(const ExecutionState& state) {
  const Totals actual = state.totals();
  const Totals nominal = state.nominal_totals();
  auto ratio = [](double a, double n) { return n > 0.0 ? a / n : 1.0; };
  return {ratio(actual.time, nominal.time), ratio(actual.price, nominal.price), ratio(actual.value, nominal.value)};
}

StateKey state_key(const ExecutionState& state, const AttackEvent& event, const Discretization& disc) {
  StateKey key;
  key.type = event.type;
  key.severity = event.severity;
  key.violations = violation_bucket(state.violation_count());
  key.action_code = action_code(state.action_history());
  const auto r = overrun_ratios(state);
  for (std::size_t k = 0; k < 3; ++k) key.overrun[k] = disc.bucket(k, r[k]);
  return key;
}

QLearningPolicy::QLearningPolicy(QTable& table, Discretization disc, RewardWeights weights, bool learn,
                                 std::uint64_t seed)
    : table_(&table), disc_(disc), weights_(weights), learn_(learn), explore_(make_stream(seed, "rl.explore")) {
  weights_.validate();
  table_->discretization() = disc_.to_json();
}

void QLearningPolicy::begin_episode(std::size_t episode) {
  epsilon_ = learn_ ? table_->config().epsilon_at(episode) : 0.0;
  steps_.clear();
  pending_state_.clear();
}

void QLearningPolicy::on_decision_point(const ExecutionState& state, const AttackEvent& event) {
  pending_state_ = state_key(state, event, disc_).encode();
}

ActionKind QLearningPolicy::choose(const AttackEvent& /*event*/, const std::vector<CandidateCost>& candidates) {
  if (pending_state_.empty()) fail(ErrorCode::Selection, "policy asked to choose outside a decision point");
  Transition t;
  t.state = pending_state_;
  pending_state_.clear();
  t.lo = {candidates[0].raw.price, candidates[0].raw.time, candidates[0].raw.value, candidates[0].raw.mitigation};
  t.hi = t.lo;
  // Cost-ranked order (stable on ties) makes unseen states fall back to the
  // Lowest-Cost choice.
  std::vector<const CandidateCost*> ranked;
  for (const auto& c : candidates) ranked.push_back(&c);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const CandidateCost* a, const CandidateCost* b) { return a->total < b->total - kNormalizeTolerance; });
  for (const CandidateCost* c : ranked) t.candidates.push_back(static_cast<int>(c->kind));
  for (const auto& c : candidates) {
    t.lo = {std::min(t.lo.price, c.raw.price), std::min(t.lo.time, c.raw.time), std::min(t.lo.value, c.raw.value),
            std::min(t.lo.mitigation, c.raw.mitigation)};
    t.hi = {std::max(t.hi.price, c.raw.price), std::max(t.hi.time, c.raw.time), std::max(t.hi.value, c.raw.value),
            std::max(t.hi.mitigation, c.raw.mitigation)};
  }
  t.action = choose_epsilon_greedy(*table_, t.state, t.candidates, epsilon_, explore_);
  for (const auto& c : candidates) {
    if (static_cast<int>(c.kind) == t.action) {
      t.realised = {c.raw.price, c.raw.time, c.raw.value, c.raw.mitigation};
    }
  }
  steps_.push_back(std::move(t));
  return static_cast<ActionKind>(steps_.back().action);
}

void QLearningPolicy::on_applied(std::size_t decision, const AdaptationDecision& /*d*/, const AppliedAction& a) {
  if (decision >= steps_.size()) return;
  Transition& t = steps_[decision];
  if (a.price_factor > 0.0) t.realised.price += a.entry.price * (1.0 - 1.0 / a.price_factor);
  if (a.time_factor > 0.0) t.realised.time += a.entry.time * (1.0 - 1.0 / a.time_factor);
}

void QLearningPolicy::on_downstream_loss(std::size_t decision, double value) {
  if (decision < steps_.size()) steps_[decision].realised.value -= value;
}

void QLearningPolicy::on_instance_end(const RunResult& result) {
  const RewardAttributes run{result.totals.price, result.totals.time, result.totals.value, result.totals.mitigation};
  if (!have_range_) {
    run_lo_ = run_hi_ = run;
    have_range_ = true;
  } else {
    run_lo_ = {std::min(run_lo_.price, run.price), std::min(run_lo_.time, run.time), std::min(run_lo_.value, run.value),
               std::min(run_lo_.mitigation, run.mitigation)};
    run_hi_ = {std::max(run_hi_.price, run.price), std::max(run_hi_.time, run.time), std::max(run_hi_.value, run.value),
               std::max(run_hi_.mitigation, run.mitigation)};
  }
  if (!learn_ || steps_.empty()) return;
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    Transition& t = steps_[k];
    RewardAttributes lo = t.lo;
    RewardAttributes hi = t.hi;
    const RewardAttributes& x = t.realised;
    lo = {std::min(lo.price, x.price), std::min(lo.time, x.time), std::min(lo.value, x.value),
          std::min(lo.mitigation, x.mitigation)};
    hi = {std::max(hi.price, x.price), std::max(hi.time, x.time), std::max(hi.value, x.value),
          std::max(hi.mitigation, x.mitigation)};
    double r = reward(x, lo, hi, weights_);
    if (k + 1 == steps_.size()) {
      r += reward(run, run_lo_, run_hi_, weights_);
      q_update(*table_, t.state, t.action, r, std::nullopt);
    } else {
      q_update(*table_, t.state, t.action, r, steps_[k + 1].state, steps_[k + 1].candidates);
    }
  }
  steps_.clear();
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

namespace {

class RatioRecorder : public InstanceObserver {
 public:
  void on_decision_point(const ExecutionState& state, const AttackEvent& /*event*/) override {
    samples.push_back(overrun_ratios(state));
  }
  std::vector<std::array<double, 3>> samples;
};

Totals add(Totals a, const Totals& b) {
  a.price += b.price;
  a.time += b.time;
  a.value += b.value;
  a.mitigation += b.mitigation;
  return a;
}

Totals scale(Totals a, double f) {
  a.price *= f;
  a.time *= f;
  a.value *= f;
  a.mitigation *= f;
  return a;
}

}  // namespace

TrustRepository warm_up_trust(const Workflow& workflow, const MultiCloud& cloud, const Detectors& detectors,
                              const ExperimentConfig& cfg, const TrustRepository& initial_trust) {
  SimulationSettings settings = cfg.settings;
  settings.tenant.strategy = Strategy::LowestCost;
  TrustRepository trust = initial_trust;
  if (!cfg.persist_trust) return trust;
  const std::uint64_t base = derive_seed(cfg.seed, "warmup");
  for (std::size_t r = 0; r < cfg.warmup_runs; ++r) {
    const SchedulingPlan plan = schedule(workflow, cloud, trust, settings.tenant);
    run_instance(workflow, plan, cloud, detectors, settings, trust, nullptr, nullptr, r, derive_seed(base, r));
  }
  return trust;
}

Discretization calibrate_discretization(const Workflow& workflow, const MultiCloud& cloud, const Detectors& detectors,
                                        const ExperimentConfig& cfg, const TrustRepository& initial_trust) {
  SimulationSettings settings = cfg.settings;
  settings.tenant.strategy = Strategy::LowestCost;
  TrustRepository trust = initial_trust;
  RatioRecorder recorder;
  const std::uint64_t base = derive_seed(cfg.seed, "calibration");
  for (std::size_t r = 0; r < cfg.calibration_runs; ++r) {
    if (!cfg.persist_trust) trust = initial_trust;
    const SchedulingPlan plan = schedule(workflow, cloud, trust, settings.tenant);
    run_instance(workflow, plan, cloud, detectors, settings, trust, nullptr, &recorder, r, derive_seed(base, r));
  }
  return Discretization::calibrate(recorder.samples);
}

ExperimentResult run_experiment(const Workflow& workflow, const MultiCloud& cloud, const Detectors& detectors,
                                const ExperimentConfig& cfg, const TrustRepository& initial_trust,
                                const QTable* warm_start) {
  if (cfg.n_runs == 0) fail(ErrorCode::Config, "an experiment needs at least one run");
  if (cfg.window == 0) fail(ErrorCode::Config, "window must be positive");
  cfg.settings.validate();
  cfg.rl.validate();
  initial_trust.check_against(cloud);
  const TrustRepository start = warm_up_trust(workflow, cloud, detectors, cfg, initial_trust);

  ExperimentResult out;
  std::optional<QTable> table;
  std::optional<QLearningPolicy> policy;
  if (cfg.settings.tenant.strategy == Strategy::Adaptive) {
    table = warm_start ? *warm_start : QTable(cfg.rl);
    Discretization disc;
    if (warm_start && !warm_start->discretization().empty()) {
      disc = Discretization::from_json(warm_start->discretization());
    } else {
      disc = calibrate_discretization(workflow, cloud, detectors, cfg, start);
    }
    policy.emplace(*table, disc, cfg.reward, true, derive_seed(cfg.seed, "adaptive"));
  }

  TrustRepository trust = start;
  out.runs.reserve(cfg.n_runs);
  for (std::size_t r = 0; r < cfg.n_runs; ++r) {
    if (!cfg.persist_trust) trust = start;
    const SchedulingPlan plan = schedule(workflow, cloud, trust, cfg.settings.tenant);
    if (policy) policy->begin_episode(r);
    RunResult res = run_instance(workflow, plan, cloud, detectors, cfg.settings, trust, policy ? &*policy : nullptr,
                                 policy ? &*policy : nullptr, r, derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    if (!cfg.keep_logs) {
      res.ledger.clear();
      res.audits.clear();
    }
    out.runs.push_back(std::move(res));
  }

  for (const auto& r : out.runs) out.mean = add(out.mean, r.totals);
  out.mean = scale(out.mean, 1.0 / static_cast<double>(out.runs.size()));
  for (const auto& r : out.runs) {
    out.stddev.price += (r.totals.price - out.mean.price) * (r.totals.price - out.mean.price);
    out.stddev.time += (r.totals.time - out.mean.time) * (r.totals.time - out.mean.time);
    out.stddev.value += (r.totals.value - out.mean.value) * (r.totals.value - out.mean.value);
    out.stddev.mitigation += (r.totals.mitigation - out.mean.mitigation) * (r.totals.mitigation - out.mean.mitigation);
  }
  const double denom = out.runs.size() > 1 ? static_cast<double>(out.runs.size() - 1) : 1.0;
  out.stddev = {std::sqrt(out.stddev.price / denom), std::sqrt(out.stddev.time / denom),
                std::sqrt(out.stddev.value / denom), std::sqrt(out.stddev.mitigation / denom)};
  if (out.runs.size() == 1) out.stddev = Totals{};

  for (std::size_t start = 0; start < out.runs.size(); start += cfg.window) {
    const std::size_t end = std::min(out.runs.size(), start + cfg.window);
    Totals w;
    for (std::size_t k = start; k < end; ++k) w = add(w, out.runs[k].totals);
    out.windows.push_back(scale(w, 1.0 / static_cast<double>(end - start)));
  }
  if (table) out.qtable = std::move(table);
  out.trust = std::move(trust);
  return out;
}

}  // namespace secflow
