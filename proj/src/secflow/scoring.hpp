#pragma once

#include <map>
#include <string>
#include <vector>

#include "secflow/datagen.hpp"
#include "secflow/model.hpp"

namespace secflow {

inline constexpr double kNormalizeTolerance = 1e-12;

/// A detected (or injected) attack bound to the task and service it hit.
struct AttackEvent {
  AttackType type = AttackType::DoS;
  SeverityLevel severity = SeverityLevel::Low;
  double level = 1.0 / 3.0;  // numeric l
  DatasetKind detected_in = DatasetKind::NTD;
  std::string task_id;
  std::string service_id;
};

/// (1 - prod_{C,I,A} (1 - obj_t * obj_a)) * afr * l.
/// Throws Domain when any input leaves [0, 1].
double attack_score(const SecurityVector& task, const SecurityVector& impact, double afr, double level);
double attack_score(const Task& task, const AttackEvent& event, const AttackSpec& spec, double afr);

/// sum_{C,I,A} (1 - obj_t * obj_a) * obj_mi, bounded by 3.
double mitigation_score(const SecurityVector& task, const SecurityVector& impact, const SecurityVector& mi);

/// Singleton: raw value kept. All equal (within 1e-12): zeros. Otherwise
/// min-max. Throws Domain on an empty input or non-finite values.
template <typename Key>
std::map<Key, double> normalize(const std::map<Key, double>& values);
std::vector<double> normalize(const std::vector<double>& values);

struct CostComponents {
  double price = 0.0;
  double time = 0.0;
  double mitigation = 0.0;
  double value = 0.0;
};

struct CandidateCost {
  ActionKind kind = ActionKind::Skip;
  CostComponents raw;
  CostComponents normalized;
  double total = 0.0;
};

/// w_price * P + w_time * T - w_security * MS - w_value * V.
double adaptation_cost(const CostWeights& w, const CostComponents& normalized);

/// Normalises each component across the candidates and fills in totals.
/// Throws Domain for an empty candidate list.
std::vector<CandidateCost> cost_breakdown(const CostWeights& w, const std::vector<std::pair<ActionKind, CostComponents>>& raw);

// ---------------------------------------------------------------------------

namespace detail {
void check_normalizable(const std::vector<double>& values);
}

template <typename Key>
std::map<Key, double> normalize(const std::map<Key, double>& values) {
  std::vector<double> flat;
  flat.reserve(values.size());
  for (const auto& [k, v] : values) flat.push_back(v);
  const std::vector<double> out = normalize(flat);
  std::map<Key, double> result;
  std::size_t idx = 0;
  for (const auto& [k, v] : values) result.emplace(k, out[idx++]);
  return result;
}

}  // namespace secflow
