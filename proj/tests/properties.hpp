#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace props {

struct Report {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const { return cases > 0 && failures == 0; }
};

Report ledger_conservation(std::size_t cases, std::uint64_t seed);
Report scheduling_eligibility(std::size_t cases, std::uint64_t seed);
Report final_candidates_containment(std::size_t cases, std::uint64_t seed);
Report normalization_bounds(std::size_t cases, std::uint64_t seed);
Report trust_monotonicity(std::size_t cases, std::uint64_t seed);
Report attack_score_monotonicity(std::size_t cases, std::uint64_t seed);
Report determinism_under_seed(std::size_t cases, std::uint64_t seed);

struct Suite {
  std::string name;
  std::function<Report(std::size_t, std::uint64_t)> run;
};

const std::vector<Suite>& all_suites();

}  // namespace props
