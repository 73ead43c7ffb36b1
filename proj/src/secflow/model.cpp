#include "secflow/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "secflow/errors.hpp"

namespace secflow {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

bool unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

bool finite_non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

SecurityVector SecurityVector::checked(double c, double i, double a) {
  if (!unit_interval(c) || !unit_interval(i) || !unit_interval(a)) {
    std::ostringstream os;
    os << "security vector (" << c << ", " << i << ", " << a << ") outside [0,1]";
    fail(ErrorCode::Validation, os.str());
  }
  return {c, i, a};
}

// ---------------------------------------------------------------------------

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Skip: return "skip";
    case ActionKind::Switch: return "switch";
    case ActionKind::Insert: return "insert";
    case ActionKind::Rework: return "rework";
    case ActionKind::Redundancy: return "redundancy";
    case ActionKind::Reconfiguration: return "reconfiguration";
  }
  return "?";
}

std::string_view to_string(ActionLevel level) {
  return level == ActionLevel::Tenant ? "tenant" : "middleware";
}

ActionKind parse_action_kind(std::string_view name) {
  const std::string key = lower(name);
  for (ActionKind kind : kAllActions) {
    if (to_string(kind) == key) return kind;
  }
  fail(ErrorCode::Validation, "unknown action kind '" + std::string(name) + "'");
}

bool Task::allows(ActionKind kind) const {
  return std::any_of(actions.begin(), actions.end(),
                     [kind](const FeasibleAction& fa) { return fa.kind == kind; });
}

const ActionParams* Task::tenant_params(ActionKind kind) const {
  for (const auto& fa : actions) {
    if (fa.kind == kind && fa.params) return &*fa.params;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

Workflow::Workflow(std::vector<Task> tasks, std::vector<ControlEdge> control_edges,
                   std::vector<DataEdge> data_edges, OverheadFractions overheads)
    : tasks_(std::move(tasks)),
      control_edges_(std::move(control_edges)),
      data_edges_(std::move(data_edges)),
      overheads_(overheads) {
  if (tasks_.empty()) fail(ErrorCode::Validation, "workflow has no tasks");

  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    const Task& t = tasks_[i];
    if (t.id.empty()) fail(ErrorCode::Validation, "task " + std::to_string(i) + " has an empty id");
    if (!index_.emplace(t.id, i).second) fail(ErrorCode::Validation, "duplicate task id '" + t.id + "'");
    SecurityVector::checked(t.requirements.c, t.requirements.i, t.requirements.a);
    if (!finite_non_negative(t.value)) fail(ErrorCode::Validation, "task '" + t.id + "' has a negative value");

    std::set<ActionKind> seen;
    for (const auto& fa : t.actions) {
      if (!seen.insert(fa.kind).second) {
        fail(ErrorCode::Validation,
             "task '" + t.id + "' lists action '" + std::string(to_string(fa.kind)) + "' twice");
      }
      if (is_tenant_level(fa.kind)) {
        if (!fa.params) {
          fail(ErrorCode::Validation, "task '" + t.id + "': tenant-level action '" +
                                          std::string(to_string(fa.kind)) + "' needs price/time/mi/value");
        }
        const ActionParams& p = *fa.params;
        if (!finite_non_negative(p.price) || !finite_non_negative(p.time) || !finite_non_negative(p.value)) {
          fail(ErrorCode::Validation, "task '" + t.id + "': action parameters must be finite and non-negative");
        }
        SecurityVector::checked(p.mitigation_impact.c, p.mitigation_impact.i, p.mitigation_impact.a);
      } else if (fa.params) {
        fail(ErrorCode::Validation, "task '" + t.id + "': middleware-level action '" +
                                        std::string(to_string(fa.kind)) + "' is resolved at runtime");
      }
    }
  }

  const std::size_t n = tasks_.size();
  incoming_.assign(n, {});
  outgoing_.assign(n, {});
  data_successors_.assign(n, {});

  for (std::size_t e = 0; e < control_edges_.size(); ++e) {
    const auto& edge = control_edges_[e];
    auto from = find(edge.from);
    auto to = find(edge.to);
    if (!from || !to) {
      fail(ErrorCode::Validation, "control edge " + edge.from + " -> " + edge.to + " references a missing task '" +
                                      (from ? edge.to : edge.from) + "'");
    }
    if (!unit_interval(edge.prob)) {
      fail(ErrorCode::Validation, "control edge " + edge.from + " -> " + edge.to + " has probability outside [0,1]");
    }
    outgoing_[*from].push_back(e);
    incoming_[*to].push_back(e);
  }

  // Kahn's algorithm; a min-heap on index keeps the order deterministic.
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& edge : control_edges_) ++indegree[index_.find(edge.to)->second];
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    std::size_t u = ready.top();
    ready.pop();
    topo_.push_back(u);
    for (std::size_t e : outgoing_[u]) {
      std::size_t v = index_.find(control_edges_[e].to)->second;
      if (--indegree[v] == 0) ready.push(v);
    }
  }
  if (topo_.size() != n) {
    // Walk the residual graph from any node still carrying in-degree to report one cycle.
    std::size_t start = 0;
    while (indegree[start] == 0) ++start;
    std::vector<int> visit_pos(n, -1);
    std::vector<std::size_t> path;
    std::size_t u = start;
    while (visit_pos[u] < 0) {
      visit_pos[u] = static_cast<int>(path.size());
      path.push_back(u);
      for (std::size_t e : incoming_[u]) {
        std::size_t p = index_.find(control_edges_[e].from)->second;
        if (indegree[p] > 0) {
          u = p;
          break;
        }
      }
    }
    std::string cycle;
    for (std::size_t k = path.size(); k-- > static_cast<std::size_t>(visit_pos[u]);) {
      cycle += tasks_[path[k]].id + " -> ";
    }
    cycle += tasks_[u].id;
    fail(ErrorCode::Validation, "control edges contain a cycle: " + cycle);
  }

  // Reachability for data edges.
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
    std::size_t u = *it;
    for (std::size_t e : outgoing_[u]) {
      std::size_t v = index_.find(control_edges_[e].to)->second;
      reach[u][v] = true;
      for (std::size_t w = 0; w < n; ++w) {
        if (reach[v][w]) reach[u][w] = true;
      }
    }
  }
  for (const auto& edge : data_edges_) {
    auto from = find(edge.from);
    auto to = find(edge.to);
    if (!from || !to) {
      fail(ErrorCode::Validation, "data edge " + edge.from + " -> " + edge.to + " references a missing task '" +
                                      (from ? edge.to : edge.from) + "'");
    }
    if (!reach[*from][*to]) {
      fail(ErrorCode::Validation, "data edge " + edge.from + " -> " + edge.to + " has no directed control path");
    }
    auto& succ = data_successors_[*from];
    if (std::find(succ.begin(), succ.end(), *to) == succ.end()) succ.push_back(*to);
  }
}

std::optional<std::size_t> Workflow::find(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Workflow::index_of(std::string_view id) const {
  auto found = find(id);
  if (!found) fail(ErrorCode::Key, "unknown task '" + std::string(id) + "'");
  return *found;
}

// ---------------------------------------------------------------------------

std::string_view to_string(AttackType type) {
  switch (type) {
    case AttackType::DoS: return "dos";
    case AttackType::Probe: return "probe";
    case AttackType::U2R: return "u2r";
    case AttackType::R2L: return "r2l";
  }
  return "?";
}

std::string_view display_name(AttackType type) {
  switch (type) {
    case AttackType::DoS: return "DoS";
    case AttackType::Probe: return "Probe";
    case AttackType::U2R: return "U2R";
    case AttackType::R2L: return "R2L";
  }
  return "?";
}

AttackType parse_attack_type(std::string_view name) {
  const std::string key = lower(name);
  for (AttackType t : kAllAttackTypes) {
    if (to_string(t) == key) return t;
  }
  fail(ErrorCode::Validation, "unknown attack type '" + std::string(name) + "'");
}

std::string_view to_string(SeverityLevel level) {
  switch (level) {
    case SeverityLevel::Low: return "low";
    case SeverityLevel::Medium: return "medium";
    case SeverityLevel::High: return "high";
  }
  return "?";
}

SeverityLevel parse_severity_level(std::string_view name) {
  const std::string key = lower(name);
  for (SeverityLevel l : kAllSeverityLevels) {
    if (to_string(l) == key) return l;
  }
  fail(ErrorCode::Validation, "unknown severity level '" + std::string(name) + "'");
}

double numeric_level(SeverityLevel level) {
  switch (level) {
    case SeverityLevel::Low: return 1.0 / 3.0;
    case SeverityLevel::Medium: return 2.0 / 3.0;
    case SeverityLevel::High: return 1.0;
  }
  return 0.0;
}

const AttackCatalog& builtin_attack_catalog() {
  using A = ActionKind;
  static const AttackCatalog catalog = {
      {AttackType::DoS,
       {AttackType::DoS,
        {0.56, 0.56, 0.56},
        {{{A::Switch, A::Rework}, {A::Insert, A::Rework}, {A::Insert, A::Rework, A::Redundancy, A::Reconfiguration}}}}},
      {AttackType::Probe,
       {AttackType::Probe,
        {0.22, 0.22, 0.0},
        {{{A::Skip}, {A::Skip, A::Reconfiguration}, {A::Skip, A::Reconfiguration}}}}},
      {AttackType::U2R,
       {AttackType::U2R,
        {0.56, 0.22, 0.22},
        {{{A::Insert, A::Rework}, {A::Insert, A::Rework}, {A::Insert, A::Rework, A::Redundancy, A::Reconfiguration}}}}},
      {AttackType::R2L,
       {AttackType::R2L,
        {0.56, 0.56, 0.22},
        {{{A::Rework}, {A::Insert, A::Rework}, {A::Insert, A::Rework, A::Reconfiguration}}}}},
  };
  return catalog;
}

// ---------------------------------------------------------------------------

SecurityVector builtin_mitigation_impact(ActionKind kind) {
  switch (kind) {
    case ActionKind::Insert: return {0.7, 0.9, 0.9};
    case ActionKind::Switch: return {0.7, 0.6, 0.8};
    case ActionKind::Skip: return {0.5, 0.4, 0.6};
    case ActionKind::Rework: return {0.5, 0.9, 0.7};
    case ActionKind::Redundancy: return {0.5, 0.8, 0.9};
    case ActionKind::Reconfiguration: return {0.6, 0.7, 0.5};
  }
  return {};
}

ActionParams builtin_action_properties(ActionKind kind, const TaskCost& task,
                                       const std::optional<BackupParams>& backup,
                                       const OverheadFractions& oh) {
  ActionParams p;
  p.mitigation_impact = builtin_mitigation_impact(kind);
  switch (kind) {
    case ActionKind::Insert:
      p.time = oh.new_task_time * task.time;
      p.price = oh.new_task_price * task.price;
      p.value = oh.new_task_value * task.value;
      break;
    case ActionKind::Switch:
      p.time = oh.switch_time * task.time;
      p.price = task.price;
      p.value = oh.switch_value * task.value;
      break;
    case ActionKind::Skip:
      break;
    case ActionKind::Rework:
      if (!backup) fail(ErrorCode::NoBackup, "rework needs a backup service");
      p.time = backup->time;
      p.price = backup->price;
      p.value = task.value;
      break;
    case ActionKind::Redundancy:
      if (!backup) fail(ErrorCode::NoBackup, "redundancy needs a backup service");
      p.time = std::max(backup->time, task.time);
      p.price = task.price + backup->price;
      p.value = task.value + oh.redundancy_value * task.value;
      break;
    case ActionKind::Reconfiguration:
      p.time = task.time + oh.reconfig_time * task.time;
      p.price = task.price + oh.reconfig_price * task.price;
      p.value = task.value + oh.reconfig_value * task.value;
      break;
  }
  return p;
}

// ---------------------------------------------------------------------------

MultiCloud::MultiCloud(std::vector<Provider> providers) : providers_(std::move(providers)) {
  std::set<std::string> provider_ids;
  for (const auto& provider : providers_) {
    if (provider.id.empty()) fail(ErrorCode::Validation, "provider with an empty id");
    if (!provider_ids.insert(provider.id).second) {
      fail(ErrorCode::Validation, "duplicate provider id '" + provider.id + "'");
    }
    for (const auto& s : provider.services) {
      if (s.provider_id != provider.id) {
        fail(ErrorCode::Validation, "service '" + s.id + "' claims provider '" + s.provider_id +
                                        "' but is listed under '" + provider.id + "'");
      }
      if (!(std::isfinite(s.price) && s.price > 0.0)) {
        fail(ErrorCode::Validation, "service '" + s.id + "' must have a positive price");
      }
      if (!(std::isfinite(s.response_time) && s.response_time > 0.0)) {
        fail(ErrorCode::Validation, "service '" + s.id + "' must have a positive response time");
      }
      SecurityVector::checked(s.guarantees.c, s.guarantees.i, s.guarantees.a);
      for (double rate : s.afr) {
        if (!unit_interval(rate)) fail(ErrorCode::Validation, "service '" + s.id + "' has an AFR outside [0,1]");
      }
    }
  }
  build_index();
  for (std::size_t k = 1; k < services_.size(); ++k) {
    if (services_[k]->id == services_[k - 1]->id) {
      fail(ErrorCode::Validation, "duplicate service id '" + services_[k]->id + "'");
    }
  }
}

void MultiCloud::build_index() {
  services_.clear();
  for (const auto& provider : providers_) {
    for (const auto& s : provider.services) services_.push_back(&s);
  }
  std::sort(services_.begin(), services_.end(), [](const Service* a, const Service* b) { return a->id < b->id; });
}

const Service* MultiCloud::find(std::string_view id) const {
  auto it = std::lower_bound(services_.begin(), services_.end(), id,
                             [](const Service* s, std::string_view key) { return s->id < key; });
  if (it == services_.end() || (*it)->id != id) return nullptr;
  return *it;
}

const Service& MultiCloud::service(std::string_view id) const {
  const Service* s = find(id);
  if (!s) fail(ErrorCode::Key, "unknown service '" + std::string(id) + "'");
  return *s;
}

const std::string& SchedulingPlan::service_for(std::string_view task_id) const {
  auto it = bindings.find(std::string(task_id));
  if (it == bindings.end()) fail(ErrorCode::Key, "task '" + std::string(task_id) + "' is not bound");
  return it->second;
}

void validate_plan(const SchedulingPlan& plan, const Workflow& workflow, const MultiCloud& cloud) {
  for (const auto& task : workflow.tasks()) {
    auto it = plan.bindings.find(task.id);
    if (it == plan.bindings.end()) fail(ErrorCode::Validation, "plan leaves task '" + task.id + "' unbound");
    if (!cloud.find(it->second)) {
      fail(ErrorCode::Validation, "plan binds task '" + task.id + "' to unknown service '" + it->second + "'");
    }
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(Strategy strategy) {
  return strategy == Strategy::LowestCost ? "lowest-cost" : "adaptive";
}

Strategy parse_strategy(std::string_view name) {
  const std::string key = lower(name);
  if (key == "lowest-cost" || key == "lowestcost" || key == "lowest_cost") return Strategy::LowestCost;
  if (key == "adaptive") return Strategy::Adaptive;
  fail(ErrorCode::Config, "unknown strategy '" + std::string(name) + "'");
}

void TenantConfig::validate() const {
  const double w[] = {weights.price, weights.time, weights.security, weights.value};
  bool any_positive = false;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) fail(ErrorCode::Config, "tenant weights must be non-negative");
    any_positive = any_positive || x > 0.0;
  }
  if (!any_positive) fail(ErrorCode::Config, "at least one tenant weight must be positive");
  if (!unit_interval(adapt_trigger_threshold)) {
    fail(ErrorCode::Config, "adapt_trigger_threshold must lie in [0,1]");
  }
}

}  // namespace secflow
