#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "secflow/decision.hpp"
#include "secflow/errors.hpp"

using namespace secflow;
using fixtures::make_service;
using fixtures::make_task;
using fixtures::middleware;
using fixtures::tenant;

namespace {

UncertaintyConfig quiet() {
  UncertaintyConfig u;
  u.overhead_sigma = 0.0;
  return u;
}

// Runs a task with the given figures, as the simulator would.
void run(ExecutionState& s, std::size_t task, double price, double time, double value) {
  s.set_status(task, TaskStatus::Running);
  s.charge(LedgerEntry{task, "run", price, time, value, 0.0, false});
  s.record_nominal(task, price, time, value);
}

AdaptationDecision decide(ActionKind kind, ActionParams params, std::optional<BackupChoice> backup = std::nullopt) {
  AdaptationDecision d;
  d.kind = kind;
  d.params = params;
  d.level = level_of(kind);
  d.backup = std::move(backup);
  return d;
}

struct Scene {
  Workflow workflow;
  MultiCloud cloud = fixtures::two_provider_cloud();
  TenantConfig cfg;
  AttackEvent event;
  DecisionInputs in;

  Scene(std::vector<FeasibleAction> actions, AttackType type, SeverityLevel sev, double afr)
      : workflow({make_task("t", {1, 1, 1}, 1.0, std::move(actions))}, {}, {}) {
    event.type = type;
    event.severity = sev;
    event.level = numeric_level(sev);
    event.task_id = "t";
    event.service_id = "a1";
    in.task = &workflow.task(0);
    in.service = &cloud.service("a1");
    in.cost = TaskCost{10, 2, 1};
    in.event = event;
    in.spec = &builtin_attack_catalog().at(type);
    in.cfg = &cfg;
    in.cloud = &cloud;
    in.afr = afr;
  }
};

class Fixed : public ActionPolicy {
 public:
  explicit Fixed(ActionKind k) : k_(k) {}
  ActionKind choose(const AttackEvent&, const std::vector<CandidateCost>&) override { return k_; }
  ActionKind k_;
};

}  // namespace

TEST_CASE("backup search") {
  const MultiCloud cloud = fixtures::two_provider_cloud();
  const Task t = make_task("t");
  AttackEvent ev;
  ev.detected_in = DatasetKind::CLF;
  const BackupChoice clf = find_backup_service(t, cloud.service("a1"), cloud, ev);
  CHECK(clf.service_id == "b2");  // cheapest outside provider pa
  MultiCloud pricey({Provider{"pa", {make_service("a1", "pa", 2, 10), make_service("a2", "pa", 0.5, 6)}},
                     Provider{"pb", {make_service("b1", "pb", 3, 8)}}});
  CHECK(find_backup_service(t, pricey.service("a1"), pricey, ev).service_id == "b1");
  ev.detected_in = DatasetKind::NTD;
  const BackupChoice ntd = find_backup_service(t, pricey.service("a1"), pricey, ev);
  CHECK(ntd.service_id == "a2");
  CHECK(ntd.params.time == 6);
  CHECK(ntd.params.price == 0.5);
  MultiCloud lonely({Provider{"p", {make_service("s", "p", 1, 1)}}});
  CHECK_THROWS_AS(find_backup_service(t, lonely.service("s"), lonely, ev), Error);
}

TEST_CASE("candidate intersection keeps declaration order") {
  const Task t = make_task("t", {1, 1, 1}, 1,
                           {tenant(ActionKind::Insert), middleware(ActionKind::Reconfiguration),
                            middleware(ActionKind::Rework), tenant(ActionKind::Skip, 0, 0, 0)});
  const auto& dos = builtin_attack_catalog().at(AttackType::DoS);
  CHECK(final_candidates(dos, SeverityLevel::High, t) ==
        std::vector<ActionKind>{ActionKind::Insert, ActionKind::Rework, ActionKind::Reconfiguration});
  CHECK(final_candidates(dos, SeverityLevel::Low, t) == std::vector<ActionKind>{ActionKind::Rework});
}

TEST_CASE("below the trigger nothing happens") {
  Scene s({tenant(ActionKind::Switch)}, AttackType::DoS, SeverityLevel::Low, 0.2);
  s.cfg.adapt_trigger_threshold = 0.1;
  // Score: (1 - 0.44^3) * 0.2 / 3, about 0.061.
  const auto out = select_action(s.in, nullptr);
  CHECK(out.status == SelectionStatus::BelowThreshold);
  CHECK(out.score == doctest::Approx((1 - 0.44 * 0.44 * 0.44) * 0.2 / 3));
  CHECK_FALSE(out.decision.has_value());
}

TEST_CASE("probe at low severity can only be skipped") {
  Scene s({tenant(ActionKind::Skip, 0, 0, 0), middleware(ActionKind::Rework)}, AttackType::Probe, SeverityLevel::Low, 0.9);
  const auto out = select_action(s.in, nullptr);
  REQUIRE(out.status == SelectionStatus::Selected);
  CHECK(out.final_candidates == std::vector<ActionKind>{ActionKind::Skip});
  CHECK(out.decision->kind == ActionKind::Skip);
  CHECK(out.decision->params.price == 0);
  CHECK(out.decision->params.time == 0);
}

TEST_CASE("lowest cost picks the minimum total") {
  Scene s({tenant(ActionKind::Switch, 2.0, 1.0, 0.9), middleware(ActionKind::Rework)}, AttackType::DoS,
          SeverityLevel::Low, 0.9);
  const auto out = select_action(s.in, nullptr);
  REQUIRE(out.status == SelectionStatus::Selected);
  REQUIRE(out.decision->candidates.size() == 2);
  // Recompute every total from the normalised components.
  std::vector<double> totals;
  for (const auto& c : out.decision->candidates) {
    const auto& n = c.normalized;
    totals.push_back(0.25 * n.price + 0.25 * n.time - 0.25 * n.mitigation - 0.25 * n.value);
    CHECK(c.total == doctest::Approx(totals.back()).epsilon(1e-12));
  }
  const std::size_t best = totals[0] <= totals[1] ? 0 : 1;
  CHECK(out.decision->kind == out.decision->candidates[best].kind);
  CHECK(out.decision->level == level_of(out.decision->kind));
}

TEST_CASE("equal totals prefer the higher mitigation score") {
  // A negligible value weight makes every total tie, leaving mitigation to decide.
  Scene s({tenant(ActionKind::Skip, 0, 0, 0), middleware(ActionKind::Reconfiguration)}, AttackType::Probe,
          SeverityLevel::High, 0.9);
  s.cfg.weights = {0, 0, 0, 0};
  s.cfg.weights.value = 1e-300;
  const auto out = select_action(s.in, nullptr);
  REQUIRE(out.status == SelectionStatus::Selected);
  const auto& c = out.decision->candidates;
  const auto best = std::max_element(c.begin(), c.end(), [](auto& a, auto& b) { return a.raw.mitigation < b.raw.mitigation; });
  CHECK(out.decision->kind == best->kind);
}

TEST_CASE("unmitigable and no-backup outcomes") {
  Scene none({tenant(ActionKind::Insert)}, AttackType::R2L, SeverityLevel::Low, 0.9);
  CHECK(select_action(none.in, nullptr).status == SelectionStatus::Unmitigable);
  Scene lonely({middleware(ActionKind::Rework)}, AttackType::R2L, SeverityLevel::Low, 0.9);
  lonely.cloud = MultiCloud({Provider{"pa", {make_service("a1", "pa", 2, 10)}}});
  lonely.in.cloud = &lonely.cloud;
  lonely.in.service = &lonely.cloud.service("a1");
  CHECK(select_action(lonely.in, nullptr).status == SelectionStatus::Unmitigable);
}

TEST_CASE("adaptive strategy defers to the policy") {
  Scene s({tenant(ActionKind::Switch, 2.0, 1.0, 0.9), middleware(ActionKind::Rework)}, AttackType::DoS,
          SeverityLevel::Low, 0.9);
  s.cfg.strategy = Strategy::Adaptive;
  Fixed rework(ActionKind::Rework);
  const auto out = select_action(s.in, &rework);
  CHECK(out.decision->kind == ActionKind::Rework);
  REQUIRE(out.decision->backup.has_value());
  CHECK(out.decision->backup->service_id == "b2");
  Fixed outsider(ActionKind::Skip);
  CHECK_THROWS_AS(select_action(s.in, &outsider), Error);
  CHECK_THROWS_AS(select_action(s.in, nullptr), Error);
}

TEST_CASE("skip removes the task's value and degrades data successors") {
  Workflow w({make_task("a"), make_task("b"), make_task("c")},
             {ControlEdge{"a", "b", "", 0.5}, ControlEdge{"a", "c", "", 0.5}},
             {DataEdge{"a", "b", "x"}, DataEdge{"a", "c", "y"}});
  ExecutionState s(w);
  run(s, 0, 2, 10, 1);
  const Totals before = s.totals();
  Rng noise(1);
  apply_tenant_action(s, 0, decide(ActionKind::Skip, {}), {10, 2, 1}, quiet(), noise);
  CHECK(s.totals().value == doctest::Approx(before.value - 1));
  CHECK(s.status(0) == TaskStatus::Skipped);
  CHECK(s.degraded_inputs(1) == 1);
  CHECK(s.degraded_inputs(2) == 1);
}

TEST_CASE("insert adds exactly its parameters") {
  Workflow w({make_task("a")}, {}, {});
  ExecutionState s(w);
  run(s, 0, 2, 10, 1);
  const Totals before = s.totals();
  const ActionParams p = builtin_action_properties(ActionKind::Insert, {10, 2, 1}, std::nullopt);
  Rng noise(1);
  const AppliedAction a = apply_tenant_action(s, 0, decide(ActionKind::Insert, p), {10, 2, 1}, quiet(), noise);
  CHECK(s.totals().price - before.price == doctest::Approx(0.4));
  CHECK(s.totals().time - before.time == doctest::Approx(2.0));
  CHECK(s.totals().value - before.value == doctest::Approx(0.1));
  CHECK(a.makespan_delta == doctest::Approx(2.0));
  CHECK(a.price_factor == 1.0);
}

TEST_CASE("rework, redundancy and reconfiguration ledger diffs") {
  Workflow w({make_task("a")}, {}, {});
  const MultiCloud cloud = fixtures::two_provider_cloud();
  AttackEvent ev;
  ev.type = AttackType::DoS;
  ev.service_id = "a1";
  const TaskCost cost{10, 2, 1};
  const BackupChoice backup{"b1", {8, 3}};
  Rng noise(1);

  SUBCASE("rework") {
    ExecutionState s(w);
    run(s, 0, 2, 10, 1);
    TrustRepository trust = TrustRepository::from_cloud(cloud);
    const auto p = builtin_action_properties(ActionKind::Rework, cost, backup.params);
    apply_middleware_action(s, 0, decide(ActionKind::Rework, p, backup), cost, ev, trust, quiet(), noise);
    CHECK(s.totals().time == doctest::Approx(18));
    CHECK(s.totals().price == doctest::Approx(5));
    CHECK(trust.afr("a1", AttackType::DoS) == doctest::Approx(0.9 * 0.1 + 0.1));
  }
  SUBCASE("redundancy replaces the single run") {
    ExecutionState s(w);
    run(s, 0, 2, 10, 1);
    TrustRepository trust = TrustRepository::from_cloud(cloud);
    const auto p = builtin_action_properties(ActionKind::Redundancy, cost, backup.params);
    apply_middleware_action(s, 0, decide(ActionKind::Redundancy, p, backup), cost, ev, trust, quiet(), noise);
    CHECK(s.task_totals(0).time == doctest::Approx(10));
    CHECK(s.task_totals(0).price == doctest::Approx(5));
    CHECK(s.task_totals(0).value == doctest::Approx(1.25));
  }
  SUBCASE("reconfiguration halves the live rate") {
    ExecutionState s(w);
    run(s, 0, 2, 10, 1);
    TrustRepository trust = TrustRepository::from_cloud(cloud);
    trust.set_afr("a1", AttackType::DoS, 0.4);
    const auto p = builtin_action_properties(ActionKind::Reconfiguration, cost, std::nullopt);
    TrustRepository no_ewma = trust;
    ExecutionState s2(w);
    run(s2, 0, 2, 10, 1);
    apply_middleware_action(s2, 0, decide(ActionKind::Reconfiguration, p), cost, ev, no_ewma, quiet(), noise, 0.0);
    CHECK(no_ewma.afr("a1", AttackType::DoS) == doctest::Approx(0.2));
    apply_middleware_action(s, 0, decide(ActionKind::Reconfiguration, p), cost, ev, trust, quiet(), noise);
    CHECK(trust.afr("a1", AttackType::DoS) == doctest::Approx(0.9 * 0.2 + 0.1));
    CHECK(s.totals().time == doctest::Approx(11));
  }
  SUBCASE("missing backup") {
    ExecutionState s(w);
    run(s, 0, 2, 10, 1);
    TrustRepository trust = TrustRepository::from_cloud(cloud);
    CHECK_THROWS_AS(apply_middleware_action(s, 0, decide(ActionKind::Rework, {}), cost, ev, trust, quiet(), noise),
                    Error);
  }
  SUBCASE("level mismatch") {
    ExecutionState s(w);
    run(s, 0, 2, 10, 1);
    CHECK_THROWS_AS(apply_tenant_action(s, 0, decide(ActionKind::Rework, {}), cost, quiet(), noise), Error);
  }
}

TEST_CASE("late rework pays the delay multiplier") {
  Workflow w({make_task("a"), make_task("b")}, {ControlEdge{"a", "b", "", 0.5}}, {});
  ExecutionState s(w);
  run(s, 0, 2, 10, 1);
  s.charge(LedgerEntry{0, "damage", 0, 5, 0, 0, false});  // 15 elapsed against 10 nominal
  run(s, 1, 1, 4, 1);
  TrustRepository trust = TrustRepository::from_cloud(fixtures::two_provider_cloud());
  AttackEvent ev;
  ev.service_id = "a1";
  Rng noise(2);
  const double before = s.totals().time;
  apply_middleware_action(s, 1, decide(ActionKind::Rework, {3, 8, {}, 1}, BackupChoice{"b1", {8, 3}}), {4, 1, 1}, ev,
                          trust, quiet(), noise);
  CHECK(s.totals().time - before == doctest::Approx(8 * 1.5));
}

TEST_CASE("execution state transitions and critical path") {
  Workflow w({make_task("a"), make_task("b"), make_task("c"), make_task("d")},
             {ControlEdge{"a", "b", "", 0.5}, ControlEdge{"a", "c", "", 0.5}, ControlEdge{"b", "d", "", 0.5},
              ControlEdge{"c", "d", "", 0.5}},
             {});
  ExecutionState s(w);
  run(s, 0, 1, 2, 1);
  run(s, 1, 1, 5, 1);
  run(s, 2, 1, 9, 1);
  run(s, 3, 1, 1, 1);
  CHECK(s.makespan() == doctest::Approx(12));
  s.charge(LedgerEntry{1, "switch", 0, 20, 0, 0, true});
  CHECK(s.makespan() == doctest::Approx(27));  // deferred tail of b: 2 + 5 + 20
  CHECK(s.nominal_makespan() == doctest::Approx(12));
  s.set_status(0, TaskStatus::Done);
  CHECK_THROWS_AS(s.set_status(0, TaskStatus::Running), Error);
  ExecutionState fresh(w);
  CHECK_NOTHROW(fresh.set_status(3, TaskStatus::Bypassed));
  CHECK_THROWS_AS(fresh.set_status(2, TaskStatus::Done), Error);
}

TEST_CASE("audit records serialise") {
  AuditRecord r;
  r.task = "t3";
  r.chosen = ActionKind::Insert;
  const Json j = audit_to_json(r);
  CHECK(j.at("task") == "t3");
  CHECK(j.at("chosen") == "insert");
}
