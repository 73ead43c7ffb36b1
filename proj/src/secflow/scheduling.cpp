#include "secflow/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "secflow/errors.hpp"

namespace secflow {

TrustRepository TrustRepository::from_cloud(const MultiCloud& cloud) {
  TrustRepository repo;
  for (const Service* s : cloud.services()) {
    repo.afr_[s->id] = s->afr;
    repo.refresh(s->id);
  }
  return repo;
}

double TrustRepository::trust(const std::string& service_id) const {
  auto it = trust_.find(service_id);
  if (it == trust_.end()) fail(ErrorCode::Key, "trust repository has no service '" + service_id + "'");
  return it->second;
}

double TrustRepository::afr(const std::string& service_id, AttackType type) const {
  auto it = afr_.find(service_id);
  if (it == afr_.end()) fail(ErrorCode::Key, "trust repository has no service '" + service_id + "'");
  return it->second[index_of(type)];
}

void TrustRepository::set_afr(const std::string& service_id, AttackType type, double rate) {
  auto it = afr_.find(service_id);
  if (it == afr_.end()) fail(ErrorCode::Key, "trust repository has no service '" + service_id + "'");
  it->second[index_of(type)] = std::clamp(rate, 0.0, 1.0);
  refresh(service_id);
}

void TrustRepository::refresh(const std::string& service_id) {
  const auto& rates = afr_.at(service_id);
  const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
  trust_[service_id] = std::clamp(1.0 - mean, 0.0, 1.0);
}

Json TrustRepository::to_json() const {
  Json afr = Json::object();
  for (const auto& [sid, rates] : afr_) {
    Json per = Json::object();
    for (AttackType t : kAllAttackTypes) per[std::string(to_string(t))] = rates[index_of(t)];
    afr[sid] = std::move(per);
  }
  return Json{{"trust", trust_}, {"afr", std::move(afr)}};
}

TrustRepository TrustRepository::from_json(const Json& doc) {
  JsonCursor root(doc, "$");
  JsonCursor afr = root.at("afr");
  if (!afr.node().is_object()) afr.error("expected an object");
  TrustRepository repo;
  for (const auto& item : afr.node().items()) {
    JsonCursor per = afr.at(item.key());
    std::array<double, 4> rates{};
    for (AttackType t : kAllAttackTypes) {
      const double r = per.number_or(to_string(t), 0.0);
      if (!(r >= 0.0 && r <= 1.0)) per.error("rate outside [0,1]");
      rates[index_of(t)] = r;
    }
    repo.afr_[item.key()] = rates;
    repo.refresh(item.key());
  }
  // The stored trust map is derived data; it is recomputed rather than trusted.
  return repo;
}

void TrustRepository::check_against(const MultiCloud& cloud) const {
  for (const auto& [sid, rates] : afr_) {
    if (!cloud.find(sid)) fail(ErrorCode::Validation, "trust repository names unknown service '" + sid + "'");
  }
}

TrustRepository update_provider_trust(TrustRepository trust, const std::string& service_id, AttackType type,
                                      bool detected, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) fail(ErrorCode::Domain, "trust beta must lie in [0,1]");
  const double old = trust.afr(service_id, type);
  trust.set_afr(service_id, type, (1.0 - beta) * old + beta * (detected ? 1.0 : 0.0));
  return trust;
}

std::vector<const Service*> eligible_services(const Task& task, const MultiCloud& cloud) {
  std::vector<const Service*> out;
  for (const Service* s : cloud.services()) {
    if (s->guarantees.covers(task.requirements)) out.push_back(s);
  }
  return out;
}

namespace {

double min_max(double x, double lo, double hi) { return hi - lo > 1e-12 ? (x - lo) / (hi - lo) : 0.0; }

}  // namespace

SchedulingPlan schedule(const Workflow& workflow, const MultiCloud& cloud, const TrustRepository& trust,
                        const TenantConfig& cfg) {
  SchedulingPlan plan;
  for (const Task& task : workflow.tasks()) {
    const auto eligible = eligible_services(task, cloud);
    if (eligible.empty()) fail(ErrorCode::Unschedulable, "no eligible service for task '" + task.id + "'");

    auto [pmin, pmax] = std::minmax_element(eligible.begin(), eligible.end(),
                                            [](auto a, auto b) { return a->price < b->price; });
    auto [tmin, tmax] = std::minmax_element(eligible.begin(), eligible.end(),
                                            [](auto a, auto b) { return a->response_time < b->response_time; });
    const Service* best = nullptr;
    double best_score = 0.0;
    for (const Service* s : eligible) {  // sorted by id, so strict < keeps the smallest id on ties
      const double score = cfg.weights.price * min_max(s->price, (*pmin)->price, (*pmax)->price) +
                           cfg.weights.time *
                               min_max(s->response_time, (*tmin)->response_time, (*tmax)->response_time) -
                           cfg.weights.security * (trust.contains(s->id) ? trust.trust(s->id) : 0.0);
      if (!best || score < best_score - 1e-12) {
        best = s;
        best_score = score;
      }
    }
    plan.bindings[task.id] = best->id;
  }
  return plan;
}

}  // namespace secflow
