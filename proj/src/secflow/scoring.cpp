#include "secflow/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "secflow/errors.hpp"

namespace secflow {

namespace {

void check_unit(double x, const char* what) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
    fail(ErrorCode::Domain, std::string(what) + " must lie in [0, 1], got " + std::to_string(x));
  }
}

void check_unit(const SecurityVector& v, const char* what) {
  check_unit(v.c, what);
  check_unit(v.i, what);
  check_unit(v.a, what);
}

}  // namespace

double attack_score(const SecurityVector& task, const SecurityVector& impact, double afr, double level) {
  check_unit(task, "task requirement");
  check_unit(impact, "attack impact");
  check_unit(afr, "afr");
  check_unit(level, "severity level");
  const double survive = (1.0 - task.c * impact.c) * (1.0 - task.i * impact.i) * (1.0 - task.a * impact.a);
  return (1.0 - survive) * afr * level;
}

double attack_score(const Task& task, const AttackEvent& event, const AttackSpec& spec, double afr) {
  return attack_score(task.requirements, spec.impact, afr, event.level);
}

double mitigation_score(const SecurityVector& task, const SecurityVector& impact, const SecurityVector& mi) {
  check_unit(task, "task requirement");
  check_unit(impact, "attack impact");
  check_unit(mi, "mitigation impact");
  return (1.0 - task.c * impact.c) * mi.c + (1.0 - task.i * impact.i) * mi.i + (1.0 - task.a * impact.a) * mi.a;
}

void detail::check_normalizable(const std::vector<double>& values) {
  if (values.empty()) fail(ErrorCode::Domain, "cannot normalise an empty set");
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::Domain, "cannot normalise non-finite values");
  }
}

std::vector<double> normalize(const std::vector<double>& values) {
  detail::check_normalizable(values);
  if (values.size() == 1) return values;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double span = *hi - min;
  std::vector<double> out(values.size(), 0.0);
  if (std::abs(span) <= kNormalizeTolerance) return out;
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = (values[k] - min) / span;
  return out;
}

double adaptation_cost(const CostWeights& w, const CostComponents& n) {
  return w.price * n.price + w.time * n.time - w.security * n.mitigation - w.value * n.value;
}

std::vector<CandidateCost> cost_breakdown(const CostWeights& w,
                                          const std::vector<std::pair<ActionKind, CostComponents>>& raw) {
  if (raw.empty()) fail(ErrorCode::Domain, "no candidate actions to cost");
  std::vector<double> price;
  std::vector<double> time;
  std::vector<double> ms;
  std::vector<double> value;
  for (const auto& [kind, c] : raw) {
    price.push_back(c.price);
    time.push_back(c.time);
    ms.push_back(c.mitigation);
    value.push_back(c.value);
  }
  price = normalize(price);
  time = normalize(time);
  ms = normalize(ms);
  value = normalize(value);
  std::vector<CandidateCost> out;
  out.reserve(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    CandidateCost c;
    c.kind = raw[k].first;
    c.raw = raw[k].second;
    c.normalized = {price[k], time[k], ms[k], value[k]};
    c.total = adaptation_cost(w, c.normalized);
    out.push_back(c);
  }
  return out;
}

}  // namespace secflow
