#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "secflow/model.hpp"
#include "secflow/serialize.hpp"

namespace secflow {

inline constexpr double kDefaultTrustBeta = 0.1;

/// Live per-service trust score and attack-frequency history, updated on
/// detected violations and consumed by the scheduler and the attack score.
class TrustRepository {
 public:
  TrustRepository() = default;

  /// Seeds the AFR history from each service's static AFR and derives trust
  /// as one minus the mean rate.
  static TrustRepository from_cloud(const MultiCloud& cloud);

  bool contains(const std::string& service_id) const { return afr_.count(service_id) != 0; }
  /// Throws Key for unknown services.
  double trust(const std::string& service_id) const;
  double afr(const std::string& service_id, AttackType type) const;

  /// Overwrites one rate (clamped to [0,1]) and refreshes the derived trust score.
  void set_afr(const std::string& service_id, AttackType type, double rate);

  const std::map<std::string, double>& trust_scores() const { return trust_; }
  const std::map<std::string, std::array<double, 4>>& afr_history() const { return afr_; }

  Json to_json() const;
  static TrustRepository from_json(const Json& doc);
  /// Throws Validation when a key does not name a service of `cloud`.
  void check_against(const MultiCloud& cloud) const;

  bool operator==(const TrustRepository&) const = default;

 private:
  void refresh(const std::string& service_id);

  std::map<std::string, double> trust_;
  std::map<std::string, std::array<double, 4>> afr_;
};

/// EWMA update of the AFR history for one (service, attack type) pair:
///   afr <- (1 - beta) * afr + beta * [detected]
///   trust <- 1 - mean over attack types of afr
TrustRepository update_provider_trust(TrustRepository trust, const std::string& service_id, AttackType type,
                                      bool detected, double beta = kDefaultTrustBeta);

/// Services whose guarantees cover the task's requirements, sorted by id.
std::vector<const Service*> eligible_services(const Task& task, const MultiCloud& cloud);

/// Binds each task to the eligible service minimising
///   w_price * price_norm + w_time * time_norm - w_security * trust
/// with min-max normalisation over the task's eligible set. Ties go to the
/// lexicographically smallest service id. Throws Unschedulable when a task
/// has no eligible service.
SchedulingPlan schedule(const Workflow& workflow, const MultiCloud& cloud, const TrustRepository& trust,
                        const TenantConfig& cfg);

}  // namespace secflow
