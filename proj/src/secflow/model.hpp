#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace secflow {

// ---------------------------------------------------------------------------
// Security objectives
// ---------------------------------------------------------------------------

/// Confidentiality / integrity / availability triple, each in [0, 1]. Used for
/// task requirements, service guarantees, attack impacts and mitigation impacts.
struct SecurityVector {
  double c = 0.0;
  double i = 0.0;
  double a = 0.0;

  /// Throws Validation when any component leaves [0, 1] or is not finite.
  static SecurityVector checked(double c, double i, double a);

  std::array<double, 3> components() const { return {c, i, a}; }
  bool covers(const SecurityVector& required) const {
    return c >= required.c && i >= required.i && a >= required.a;
  }
  bool operator==(const SecurityVector&) const = default;
};

// ---------------------------------------------------------------------------
// Adaptation actions
// ---------------------------------------------------------------------------

/// Declaration order here is the tie-break order used everywhere.
enum class ActionKind { Skip, Switch, Insert, Rework, Redundancy, Reconfiguration };

inline constexpr std::array<ActionKind, 6> kAllActions = {
    ActionKind::Skip,   ActionKind::Switch,     ActionKind::Insert,
    ActionKind::Rework, ActionKind::Redundancy, ActionKind::Reconfiguration};

enum class ActionLevel { Tenant, Middleware };

constexpr bool is_tenant_level(ActionKind kind) {
  return kind == ActionKind::Skip || kind == ActionKind::Switch || kind == ActionKind::Insert;
}
constexpr ActionLevel level_of(ActionKind kind) {
  return is_tenant_level(kind) ? ActionLevel::Tenant : ActionLevel::Middleware;
}

std::string_view to_string(ActionKind kind);
std::string_view to_string(ActionLevel level);
/// Case-insensitive. Throws Validation for unknown names.
ActionKind parse_action_kind(std::string_view name);

struct ActionParams {
  double price = 0.0;
  double time = 0.0;
  SecurityVector mitigation_impact;
  double value = 0.0;

  bool operator==(const ActionParams&) const = default;
};

/// One entry of a task's feasible action set. Tenant-level entries carry the
/// parameters fixed at modelling time; middleware-level entries never do
/// because their price and time depend on the backup service found at runtime.
struct FeasibleAction {
  ActionKind kind = ActionKind::Skip;
  std::optional<ActionParams> params;

  bool operator==(const FeasibleAction&) const = default;
};

// ---------------------------------------------------------------------------
// Workflow
// ---------------------------------------------------------------------------

struct Task {
  std::string id;
  SecurityVector requirements;
  double value = 0.0;
  std::vector<FeasibleAction> actions;

  bool allows(ActionKind kind) const;
  /// Null for middleware kinds or kinds the task does not allow.
  const ActionParams* tenant_params(ActionKind kind) const;

  bool operator==(const Task&) const = default;
};

struct ControlEdge {
  std::string from;
  std::string to;
  std::string cond;  // empty: unconditional
  double prob = 0.5;

  bool operator==(const ControlEdge&) const = default;
};

struct DataEdge {
  std::string from;
  std::string to;
  std::string data;

  bool operator==(const DataEdge&) const = default;
};

/// Overheads of the table-driven action rows, expressed as fractions of the
/// task's own time, price and value.
struct OverheadFractions {
  double new_task_time = 0.2;
  double new_task_price = 0.2;
  double new_task_value = 0.1;
  double switch_time = 0.1;
  double switch_value = 0.9;
  double reconfig_time = 0.1;
  double reconfig_price = 0.1;
  double reconfig_value = 0.1;
  double redundancy_value = 0.25;

  bool operator==(const OverheadFractions&) const = default;
};

/// Validated, immutable workflow DAG.
class Workflow {
 public:
  Workflow() = default;
  /// Throws Validation on duplicate ids, dangling edges, control cycles,
  /// data edges without a directed control path, or malformed actions.
  Workflow(std::vector<Task> tasks, std::vector<ControlEdge> control_edges,
           std::vector<DataEdge> data_edges, OverheadFractions overheads = {});

  const std::vector<Task>& tasks() const { return tasks_; }
  const std::vector<ControlEdge>& control_edges() const { return control_edges_; }
  const std::vector<DataEdge>& data_edges() const { return data_edges_; }
  const OverheadFractions& overheads() const { return overheads_; }

  std::size_t size() const { return tasks_.size(); }
  const Task& task(std::size_t index) const { return tasks_.at(index); }
  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws Key for unknown ids.
  std::size_t index_of(std::string_view id) const;

  /// Kahn order, ties resolved by declaration order.
  const std::vector<std::size_t>& topological_order() const { return topo_; }
  /// Indices into control_edges().
  const std::vector<std::size_t>& incoming(std::size_t task) const { return incoming_.at(task); }
  const std::vector<std::size_t>& outgoing(std::size_t task) const { return outgoing_.at(task); }
  const std::vector<std::size_t>& data_successors(std::size_t task) const {
    return data_successors_.at(task);
  }

  bool operator==(const Workflow& other) const {
    return tasks_ == other.tasks_ && control_edges_ == other.control_edges_ &&
           data_edges_ == other.data_edges_ && overheads_ == other.overheads_;
  }

 private:
  std::vector<Task> tasks_;
  std::vector<ControlEdge> control_edges_;
  std::vector<DataEdge> data_edges_;
  OverheadFractions overheads_;

  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::size_t> topo_;
  std::vector<std::vector<std::size_t>> incoming_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::vector<std::size_t>> data_successors_;
};

// ---------------------------------------------------------------------------
// Attacks
// ---------------------------------------------------------------------------

enum class AttackType { DoS, Probe, U2R, R2L };
inline constexpr std::array<AttackType, 4> kAllAttackTypes = {AttackType::DoS, AttackType::Probe,
                                                              AttackType::U2R, AttackType::R2L};

enum class SeverityLevel { Low, Medium, High };
inline constexpr std::array<SeverityLevel, 3> kAllSeverityLevels = {
    SeverityLevel::Low, SeverityLevel::Medium, SeverityLevel::High};

/// Lowercase wire name ("dos", "probe", "u2r", "r2l").
std::string_view to_string(AttackType type);
std::string_view display_name(AttackType type);
AttackType parse_attack_type(std::string_view name);
std::string_view to_string(SeverityLevel level);
SeverityLevel parse_severity_level(std::string_view name);
/// Low -> 1/3, Medium -> 2/3, High -> 1.
double numeric_level(SeverityLevel level);
constexpr std::size_t index_of(AttackType type) { return static_cast<std::size_t>(type); }

struct AttackSpec {
  AttackType type = AttackType::DoS;
  SecurityVector impact;
  std::array<std::vector<ActionKind>, 3> mitigations;  // indexed by SeverityLevel

  const std::vector<ActionKind>& mitigations_for(SeverityLevel level) const {
    return mitigations[static_cast<std::size_t>(level)];
  }
  bool operator==(const AttackSpec&) const = default;
};

using AttackCatalog = std::map<AttackType, AttackSpec>;

/// The four built-in attack rows. Returns the same immutable instance on every call.
const AttackCatalog& builtin_attack_catalog();

// ---------------------------------------------------------------------------
// Action properties table
// ---------------------------------------------------------------------------

/// Runtime figures of the original task on its bound service.
struct TaskCost {
  double time = 0.0;
  double price = 0.0;
  double value = 0.0;
};

struct BackupParams {
  double time = 0.0;
  double price = 0.0;
};

/// Fixed mitigation impact of each action kind.
SecurityVector builtin_mitigation_impact(ActionKind kind);

/// Instantiates the action-properties row for `kind`.
///
/// Insert:          (0.2T, 0.2P, 0.1V) with default overheads
/// Switch:          (T_switch, P, V_switch)
/// Skip:            all zero
/// Rework:          (T_backup, P_backup, V)
/// Redundancy:      (max(T_backup, T), P + P_backup, V + V_redundancy)
/// Reconfiguration: (T + T_reconfig, P + P_reconfig, V + V_reconfig)
///
/// Throws NoBackup for Rework/Redundancy without backup parameters.
ActionParams builtin_action_properties(ActionKind kind, const TaskCost& task,
                                       const std::optional<BackupParams>& backup,
                                       const OverheadFractions& overheads = {});

// ---------------------------------------------------------------------------
// Multi-cloud
// ---------------------------------------------------------------------------

struct Service {
  std::string id;
  std::string provider_id;
  double price = 0.0;
  double response_time = 0.0;
  SecurityVector guarantees;
  std::array<double, 4> afr{};  // indexed by AttackType

  double afr_for(AttackType type) const { return afr[index_of(type)]; }
  bool operator==(const Service&) const = default;
};

struct Provider {
  std::string id;
  std::vector<Service> services;

  bool operator==(const Provider&) const = default;
};

class MultiCloud {
 public:
  MultiCloud() = default;
  /// Throws Validation on duplicate service ids, provider mismatches or
  /// out-of-range service attributes.
  explicit MultiCloud(std::vector<Provider> providers);
  // The service index points into providers_, so copies rebuild it.
  MultiCloud(const MultiCloud& other) : providers_(other.providers_) { build_index(); }
  MultiCloud& operator=(const MultiCloud& other) {
    if (this != &other) {
      providers_ = other.providers_;
      build_index();
    }
    return *this;
  }
  MultiCloud(MultiCloud&&) noexcept = default;
  MultiCloud& operator=(MultiCloud&&) noexcept = default;

  const std::vector<Provider>& providers() const { return providers_; }
  /// All services sorted by id.
  const std::vector<const Service*>& services() const { return services_; }
  const Service* find(std::string_view id) const;
  /// Throws Key for unknown ids.
  const Service& service(std::string_view id) const;

  bool operator==(const MultiCloud& other) const { return providers_ == other.providers_; }

 private:
  void build_index();

  std::vector<Provider> providers_;
  std::vector<const Service*> services_;
};

struct SchedulingPlan {
  std::map<std::string, std::string> bindings;  // task id -> service id

  /// Throws Key when the task is unbound.
  const std::string& service_for(std::string_view task_id) const;
  bool operator==(const SchedulingPlan&) const = default;
};

/// Throws Validation unless every task is bound to an existing service.
void validate_plan(const SchedulingPlan& plan, const Workflow& workflow, const MultiCloud& cloud);

// ---------------------------------------------------------------------------
// Tenant
// ---------------------------------------------------------------------------

enum class Strategy { LowestCost, Adaptive };
std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

struct CostWeights {
  double price = 0.25;
  double time = 0.25;
  double security = 0.25;
  double value = 0.25;
};

struct TenantConfig {
  CostWeights weights;
  double adapt_trigger_threshold = 0.01;
  Strategy strategy = Strategy::LowestCost;

  /// Throws Config on negative weights, all-zero weights or a threshold outside [0, 1].
  void validate() const;
};

}  // namespace secflow
