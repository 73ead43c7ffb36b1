#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "secflow/datagen.hpp"
#include "secflow/serialize.hpp"

namespace secflow {

inline constexpr std::size_t kSeverityClusters = 3;
inline constexpr std::size_t kChiSquareBins = 10;

/// Chi-square statistic of one feature against the binary attack-vs-normal
/// label, after equal-width binning into `bins` bins. Empty bins are dropped.
double chi_square_statistic(std::span<const double> feature, std::span<const std::uint8_t> is_attack,
                            std::size_t bins = kChiSquareBins);

/// Indices of the `top_k` features with the largest statistic, descending;
/// ties go to the lower index. Throws Selection when the filtered data does
/// not contain both attack and normal records, or top_k exceeds the width.
std::vector<std::size_t> chi_square_select(const Dataset& ds, AttackType type, std::size_t top_k);

struct KMeansOptions {
  std::size_t k = kSeverityClusters;
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;
  std::size_t max_reseeds = 5;
};

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> inertia_history;
};

/// Lloyd iterations from k-means++ seeding. A run that leaves a cluster empty
/// is re-seeded; after `max_reseeds` failures throws Fitting.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, const KMeansOptions& opts, std::uint64_t seed);

struct SeverityEntry {
  std::vector<std::size_t> features;
  /// Per selected feature, applied before clustering: z = (x - mean) / scale.
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<std::vector<double>> centroids;
  std::vector<double> cluster_severity;    // mean hidden intensity per cluster
  std::vector<SeverityLevel> cluster_level;

  /// Nearest centroid; equidistant centroids resolve to the lower level.
  SeverityLevel assess(std::span<const double> features) const;
};

/// Fits one (kind, type) entry: chi-square selection over the type's records
/// plus Normal, then k-means on the selected features of the attack records,
/// centred on their mean and scaled by the normal-traffic spread. Throws
/// Fitting on fewer than k attack records.
SeverityEntry fit_severity(const Dataset& ds, AttackType type, std::uint64_t seed,
                           const KMeansOptions& opts = {});

class SeverityModel {
 public:
  void set(DatasetKind kind, AttackType type, SeverityEntry entry);
  bool contains(DatasetKind kind, AttackType type) const;
  /// Throws Assessment when the pair has no entry.
  const SeverityEntry& entry(DatasetKind kind, AttackType type) const;
  /// Throws Assessment for unknown pairs and on a feature-count mismatch.
  std::pair<SeverityLevel, double> assess(DatasetKind kind, AttackType type, std::span<const double> features) const;

  const std::map<std::pair<DatasetKind, AttackType>, SeverityEntry>& entries() const { return entries_; }

  Json to_json() const;
  static SeverityModel from_json(const Json& doc);

 private:
  std::map<std::pair<DatasetKind, AttackType>, SeverityEntry> entries_;
};

/// Fits every attack type present in `ds`.
SeverityModel fit_severity_model(const Dataset& ds, std::uint64_t seed, const KMeansOptions& opts = {});

}  // namespace secflow
