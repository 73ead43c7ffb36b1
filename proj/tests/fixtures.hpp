#pragma once

#include <optional>
#include <string>
#include <vector>

#include "secflow/model.hpp"
#include "secflow/rng.hpp"

namespace fixtures {

using namespace secflow;

inline FeasibleAction tenant(ActionKind kind, double price = 1.0, double time = 1.0, double value = 0.5) {
  return FeasibleAction{kind, ActionParams{price, time, builtin_mitigation_impact(kind), value}};
}

inline FeasibleAction middleware(ActionKind kind) { return FeasibleAction{kind, std::nullopt}; }

inline Task make_task(const std::string& id, SecurityVector req = {0.5, 0.5, 0.5}, double value = 1.0,
                      std::vector<FeasibleAction> actions = {}) {
  if (actions.empty()) actions = {tenant(ActionKind::Skip, 0, 0, 0), middleware(ActionKind::Rework)};
  return Task{id, req, value, std::move(actions)};
}

inline Service make_service(const std::string& id, const std::string& provider, double price, double time,
                            SecurityVector guarantees = {1, 1, 1}, std::array<double, 4> afr = {0.1, 0.1, 0.1, 0.1}) {
  return Service{id, provider, price, time, guarantees, afr};
}

/// Tasks t0..t{n-1} joined in a chain.
inline Workflow chain(std::size_t n, std::vector<FeasibleAction> actions = {}) {
  std::vector<Task> tasks;
  std::vector<ControlEdge> edges;
  for (std::size_t k = 0; k < n; ++k) {
    tasks.push_back(make_task("t" + std::to_string(k), {0.5, 0.5, 0.5}, 1.0, actions));
    if (k > 0) edges.push_back(ControlEdge{"t" + std::to_string(k - 1), "t" + std::to_string(k), "", 0.5});
  }
  return Workflow(std::move(tasks), std::move(edges), {});
}

/// Two providers with two services each, all covering any requirement.
inline MultiCloud two_provider_cloud() {
  return MultiCloud({Provider{"pa", {make_service("a1", "pa", 2, 10), make_service("a2", "pa", 4, 6)}},
                     Provider{"pb", {make_service("b1", "pb", 3, 8), make_service("b2", "pb", 1, 20)}}});
}

inline SecurityVector random_vector(Rng& rng) { return {uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)}; }

}  // namespace fixtures
