#include "secflow/rl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "secflow/errors.hpp"

namespace secflow {

void RLConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorCode::Config, "alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail(ErrorCode::Config, "gamma must lie in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail(ErrorCode::Config, "epsilon must lie in [0, 1]");
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) fail(ErrorCode::Config, "epsilon_decay must lie in (0, 1]");
  if (!(epsilon_floor >= 0.0 && epsilon_floor <= 1.0)) fail(ErrorCode::Config, "epsilon_floor must lie in [0, 1]");
}

double RLConfig::epsilon_at(std::size_t episode) const {
  const double decayed = epsilon * std::pow(epsilon_decay, static_cast<double>(episode));
  return std::max(std::min(epsilon, epsilon_floor), decayed);
}

Json rl_config_to_json(const RLConfig& cfg) {
  return Json{{"alpha", cfg.alpha},
              {"gamma", cfg.gamma},
              {"epsilon", cfg.epsilon},
              {"epsilon_decay", cfg.epsilon_decay},
              {"epsilon_floor", cfg.epsilon_floor}};
}

RLConfig rl_config_from_json(const Json& doc) {
  JsonCursor cur(doc, "$.config");
  RLConfig cfg;
  cfg.alpha = cur.number_or("alpha", cfg.alpha);
  cfg.gamma = cur.number_or("gamma", cfg.gamma);
  cfg.epsilon = cur.number_or("epsilon", cfg.epsilon);
  cfg.epsilon_decay = cur.number_or("epsilon_decay", cfg.epsilon_decay);
  cfg.epsilon_floor = cur.number_or("epsilon_floor", cfg.epsilon_floor);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------

QTable::QTable(RLConfig cfg) : cfg_(cfg) { cfg_.validate(); }

double QTable::q(const std::string& state, int action) const {
  const auto it = entries_.find({state, action});
  return it == entries_.end() ? 0.0 : it->second.q;
}

std::size_t QTable::visits(const std::string& state, int action) const {
  const auto it = entries_.find({state, action});
  return it == entries_.end() ? 0 : it->second.visits;
}

void QTable::set(const std::string& state, int action, double q) {
  if (!std::isfinite(q)) fail(ErrorCode::Domain, "Q-values must be finite");
  entries_[{state, action}].q = q;
}

double QTable::max_q(const std::string& state, const std::vector<int>& actions) const {
  if (!actions.empty()) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a : actions) best = std::max(best, q(state, a));
    return best;
  }
  auto it = entries_.lower_bound({state, std::numeric_limits<int>::min()});
  if (it == entries_.end() || it->first.first != state) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (; it != entries_.end() && it->first.first == state; ++it) best = std::max(best, it->second.q);
  return best;
}

Json QTable::to_json() const {
  Json entries = Json::array();
  for (const auto& [key, e] : entries_) {
    entries.push_back(Json{{"state", key.first}, {"action", key.second}, {"q", e.q}, {"n", e.visits}});
  }
  Json terminal = Json::array();
  for (const auto& [s, flag] : terminal_) terminal.push_back(s);
  return Json{{"config", rl_config_to_json(cfg_)},
              {"discretization", discretization_},
              {"terminal", std::move(terminal)},
              {"entries", std::move(entries)}};
}

QTable QTable::from_json(const Json& doc) {
  JsonCursor root(doc, "$");
  QTable table(rl_config_from_json(root.at("config").node()));
  if (root.has("discretization")) table.discretization_ = root.at("discretization").node();
  if (root.has("terminal")) {
    JsonCursor terminal = root.at("terminal");
    for (std::size_t k = 0; k < terminal.array_size(); ++k) table.mark_terminal(terminal.at(k).string());
  }
  JsonCursor entries = root.at("entries");
  for (std::size_t k = 0; k < entries.array_size(); ++k) {
    JsonCursor e = entries.at(k);
    const double q = e.at("q").number();
    if (!std::isfinite(q)) e.at("q").error("must be finite");
    const double n = e.number_or("n", 0.0);
    if (n < 0) e.at("n").error("must be non-negative");
    QEntry& slot = table.entries_[{e.at("state").string(), static_cast<int>(e.at("action").number())}];
    slot.q = q;
    slot.visits = static_cast<std::size_t>(n);
  }
  return table;
}

bool QTable::operator==(const QTable& other) const {
  if (entries_.size() != other.entries_.size() || terminal_ != other.terminal_) return false;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.q != b->second.q || a->second.visits != b->second.visits) return false;
  }
  return discretization_ == other.discretization_;
}

// ---------------------------------------------------------------------------

void RewardWeights::validate() const {
  if (price > 0.0 || time > 0.0) fail(ErrorCode::Config, "price and time reward weights must be <= 0");
  if (value < 0.0 || mitigation < 0.0) fail(ErrorCode::Config, "value and mitigation reward weights must be >= 0");
}

double reward(const RewardAttributes& obs, const RewardAttributes& lo, const RewardAttributes& hi,
              const RewardWeights& w) {
  const std::array<double, 4> x{obs.price, obs.time, obs.value, obs.mitigation};
  const std::array<double, 4> mn{lo.price, lo.time, lo.value, lo.mitigation};
  const std::array<double, 4> mx{hi.price, hi.time, hi.value, hi.mitigation};
  const std::array<double, 4> wt{w.price, w.time, w.value, w.mitigation};
  double total = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!std::isfinite(x[k]) || !std::isfinite(mn[k]) || !std::isfinite(mx[k]) || !std::isfinite(wt[k])) {
      fail(ErrorCode::Domain, "reward inputs must be finite");
    }
    if (mx[k] < mn[k]) fail(ErrorCode::Domain, "reward range has max below min");
    const double span = mx[k] - mn[k];
    if (span <= 1e-12) continue;
    total += wt[k] * (x[k] - mn[k]) / span;
  }
  return total;
}

void q_update(QTable& table, const std::string& state, int action, double r, const std::optional<std::string>& next,
              const std::vector<int>& next_actions) {
  if (!std::isfinite(r)) fail(ErrorCode::Domain, "reward must be finite");
  double future = 0.0;
  if (next && !table.is_terminal(*next)) future = table.max_q(*next, next_actions);
  QEntry& e = table.entries_[{state, action}];
  e.q += table.cfg_.alpha * (r + table.cfg_.gamma * future - e.q);
  ++e.visits;
}

int predict(const QTable& table, const std::string& state, const std::vector<int>& candidates) {
  if (candidates.empty()) fail(ErrorCode::Domain, "no candidate actions");
  int best = candidates.front();
  double best_q = table.q(state, best);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const double q = table.q(state, candidates[k]);
    if (q > best_q) {
      best_q = q;
      best = candidates[k];
    }
  }
  return best;
}

int choose_epsilon_greedy(const QTable& table, const std::string& state, const std::vector<int>& candidates,
                          double epsilon, Rng& rng) {
  if (candidates.empty()) fail(ErrorCode::Domain, "no candidate actions");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)];
  }
  return predict(table, state, candidates);
}

QTable train(Environment& env, std::size_t episodes, const RLConfig& cfg, std::uint64_t seed, std::size_t max_steps) {
  if (episodes == 0) fail(ErrorCode::Config, "training needs at least one episode");
  QTable table(cfg);
  Rng env_rng = make_stream(seed, "rl.env");
  Rng explore = make_stream(seed, "rl.explore");
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    try {
      const double eps = cfg.epsilon_at(ep);
      std::string state = env.reset(env_rng);
      for (std::size_t step = 0; step < max_steps; ++step) {
        const std::vector<int> acts = env.actions(state);
        if (acts.empty()) break;
        const int a = choose_epsilon_greedy(table, state, acts, eps, explore);
        const Environment::Step s = env.step(state, a, env_rng);
        if (s.terminal) {
          table.mark_terminal(s.next);
          q_update(table, state, a, s.reward, std::nullopt);
          break;
        }
        q_update(table, state, a, s.reward, s.next, env.actions(s.next));
        state = s.next;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "episode " + std::to_string(ep) + ": " + e.what());
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

Discretization Discretization::calibrate(const std::vector<std::array<double, 3>>& samples) {
  Discretization d;
  if (samples.empty()) return d;
  for (std::size_t attr = 0; attr < 3; ++attr) {
    std::vector<double> xs;
    xs.reserve(samples.size());
    for (const auto& s : samples) xs.push_back(s[attr]);
    std::sort(xs.begin(), xs.end());
    for (std::size_t q = 0; q < 3; ++q) {
      const double pos = 0.25 * static_cast<double>(q + 1) * static_cast<double>(xs.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, xs.size() - 1);
      d.cuts[attr][q] = xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
    }
  }
  return d;
}

int Discretization::bucket(std::size_t attribute, double ratio) const {
  const auto& c = cuts.at(attribute);
  return static_cast<int>(std::count_if(c.begin(), c.end(), [ratio](double cut) { return cut < ratio; }));
}

Json Discretization::to_json() const {
  return Json{{"time", cuts[0]}, {"price", cuts[1]}, {"value", cuts[2]}};
}

Discretization Discretization::from_json(const Json& doc) {
  Discretization d;
  JsonCursor cur(doc, "$.discretization");
  const char* names[3] = {"time", "price", "value"};
  for (std::size_t attr = 0; attr < 3; ++attr) {
    JsonCursor arr = cur.at(names[attr]);
    if (arr.array_size() != 3) arr.error("needs three cut points");
    for (std::size_t q = 0; q < 3; ++q) d.cuts[attr][q] = arr.at(q).number();
    if (!std::is_sorted(d.cuts[attr].begin(), d.cuts[attr].end())) arr.error("cut points must be ascending");
  }
  return d;
}

std::string StateKey::encode() const {
  std::string s;
  s += to_string(type);
  s += '/';
  s += to_string(severity);
  s += "/v" + std::to_string(violations);
  s += "/a" + std::to_string(action_code);
  s += "/t" + std::to_string(overrun[0]) + "p" + std::to_string(overrun[1]) + "w" + std::to_string(overrun[2]);
  return s;
}

int action_code(const std::vector<ActionKind>& history) {
  int skip = 0;
  int tenant = 0;
  int middleware = 0;
  for (ActionKind k : history) {
    if (k == ActionKind::Skip) {
      ++skip;
    } else if (is_tenant_level(k)) {
      ++tenant;
    } else {
      ++middleware;
    }
  }
  return 9 * std::min(skip, 2) + 3 * std::min(tenant, 2) + std::min(middleware, 2);
}

int violation_bucket(std::size_t count) { return static_cast<int>(std::min<std::size_t>(count, 3)); }

}  // namespace secflow
