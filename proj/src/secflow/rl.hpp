#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "secflow/model.hpp"
#include "secflow/rng.hpp"
#include "secflow/serialize.hpp"

namespace secflow {

struct RLConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.3;
  double epsilon_decay = 0.995;
  double epsilon_floor = 0.01;

  /// Throws Config unless alpha in (0,1], gamma in [0,1), epsilon in [0,1].
  void validate() const;
  /// Exploration rate for episode `episode` (0-based). The floor never raises
  /// an initial epsilon that already sits below it.
  double epsilon_at(std::size_t episode) const;
};

Json rl_config_to_json(const RLConfig& cfg);
RLConfig rl_config_from_json(const Json& doc);

struct QEntry {
  double q = 0.0;
  std::size_t visits = 0;
};

class QTable {
 public:
  explicit QTable(RLConfig cfg = {});

  const RLConfig& config() const { return cfg_; }
  /// Unseen pairs are worth 0.
  double q(const std::string& state, int action) const;
  std::size_t visits(const std::string& state, int action) const;
  bool seen(const std::string& state, int action) const { return entries_.count({state, action}) != 0; }
  void set(const std::string& state, int action, double q);
  /// Max over the given actions (unseen = 0), or over the stored actions
  /// of `state` when `actions` is empty; 0 when nothing is stored.
  double max_q(const std::string& state, const std::vector<int>& actions = {}) const;

  void mark_terminal(const std::string& state) { terminal_[state] = true; }
  bool is_terminal(const std::string& state) const { return terminal_.count(state) != 0; }

  const std::map<std::pair<std::string, int>, QEntry>& entries() const { return entries_; }
  /// Opaque state-discretisation settings persisted with the table.
  Json& discretization() { return discretization_; }
  const Json& discretization() const { return discretization_; }

  Json to_json() const;
  static QTable from_json(const Json& doc);
  bool operator==(const QTable& other) const;

 private:
  friend void q_update(QTable&, const std::string&, int, double, const std::optional<std::string>&,
                       const std::vector<int>&);

  RLConfig cfg_;
  std::map<std::pair<std::string, int>, QEntry> entries_;
  std::map<std::string, bool> terminal_;
  Json discretization_ = Json::object();
};

/// Weighted attributes. Price and time weights must be <= 0, value and
/// mitigation weights >= 0.
struct RewardWeights {
  double price = -0.25;
  double time = -0.25;
  double value = 0.25;
  double mitigation = 0.25;

  void validate() const;
};

struct RewardAttributes {
  double price = 0.0;
  double time = 0.0;
  double value = 0.0;
  double mitigation = 0.0;
};

/// sum_i W_i * (att_i - min_i) / (max_i - min_i); a term with max == min
/// (within 1e-12) contributes 0. Throws Domain on non-finite input or max < min.
double reward(const RewardAttributes& observed, const RewardAttributes& min, const RewardAttributes& max,
              const RewardWeights& w);

/// Q(st,a) += alpha * (r + gamma * max_a' Q(st',a') - Q(st,a)).
/// `next` empty or terminal counts as 0. `next_actions` restricts the max
/// (unseen actions worth 0).
void q_update(QTable& table, const std::string& state, int action, double r, const std::optional<std::string>& next,
              const std::vector<int>& next_actions = {});

/// Greedy argmax over candidates, unseen worth 0, ties to the earliest
/// candidate. Throws Domain on an empty candidate list.
int predict(const QTable& table, const std::string& state, const std::vector<int>& candidates);

/// Explores uniformly with probability epsilon, otherwise predicts.
int choose_epsilon_greedy(const QTable& table, const std::string& state, const std::vector<int>& candidates,
                          double epsilon, Rng& rng);

/// Episodic environment for generic training.
class Environment {
 public:
  struct Step {
    std::string next;
    double reward = 0.0;
    bool terminal = false;
  };

  virtual ~Environment() = default;
  virtual std::string reset(Rng& rng) = 0;
  virtual std::vector<int> actions(const std::string& state) const = 0;
  virtual Step step(const std::string& state, int action, Rng& rng) = 0;
};

/// Epsilon-greedy Q-learning over `episodes` episodes of at most `max_steps`
/// steps. Deterministic given the seed. Errors raised by the environment are
/// rethrown with the episode index prefixed.
QTable train(Environment& env, std::size_t episodes, const RLConfig& cfg, std::uint64_t seed,
             std::size_t max_steps = 1000);

// ---------------------------------------------------------------------------
// Workflow state encoding
// ---------------------------------------------------------------------------

/// Quartile cut points for the time, price and value overrun ratios
/// (actual / nominal so far), fixed before training and saved with the table.
struct Discretization {
  std::array<std::array<double, 3>, 3> cuts{{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}}};

  static Discretization calibrate(const std::vector<std::array<double, 3>>& samples);
  /// Number of cut points strictly below `ratio`: 0..3.
  int bucket(std::size_t attribute, double ratio) const;

  Json to_json() const;
  static Discretization from_json(const Json& doc);
};

struct StateKey {
  AttackType type = AttackType::DoS;
  SeverityLevel severity = SeverityLevel::Low;
  int violations = 0;   // 0..3, 3 meaning three or more
  int action_code = 0;  // 0..26
  std::array<int, 3> overrun{};

  std::string encode() const;
};

/// Skip count, other tenant-level count and middleware count, each capped
/// at 2, packed base 3.
int action_code(const std::vector<ActionKind>& history);
int violation_bucket(std::size_t count);

}  // namespace secflow
