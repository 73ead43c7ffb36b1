#include "secflow/severity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "secflow/errors.hpp"
#include "secflow/rng.hpp"

namespace secflow {

// ---------------------------------------------------------------------------
// Feature selection
// ---------------------------------------------------------------------------

double chi_square_statistic(std::span<const double> feature, std::span<const std::uint8_t> is_attack,
                            std::size_t bins) {
  if (feature.size() != is_attack.size()) fail(ErrorCode::InvalidArgument, "feature and label lengths differ");
  if (feature.empty() || bins == 0) return 0.0;
  const auto [lo_it, hi_it] = std::minmax_element(feature.begin(), feature.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / static_cast<double>(bins);

  std::vector<std::array<double, 2>> observed(bins, {0.0, 0.0});
  for (std::size_t r = 0; r < feature.size(); ++r) {
    std::size_t b = 0;
    if (width > 0.0) b = std::min(bins - 1, static_cast<std::size_t>((feature[r] - lo) / width));
    observed[b][is_attack[r] ? 1 : 0] += 1.0;
  }
  const double n = static_cast<double>(feature.size());
  std::array<double, 2> col{0.0, 0.0};
  for (const auto& row : observed) {
    col[0] += row[0];
    col[1] += row[1];
  }
  double chi2 = 0.0;
  for (const auto& row : observed) {
    const double row_total = row[0] + row[1];
    if (row_total == 0.0) continue;
    for (std::size_t c = 0; c < 2; ++c) {
      const double expected = row_total * col[c] / n;
      if (expected > 0.0) chi2 += (row[c] - expected) * (row[c] - expected) / expected;
    }
  }
  return chi2;
}

std::vector<std::size_t> chi_square_select(const Dataset& ds, AttackType type, std::size_t top_k) {
  const Dataset filtered = filter_attack(ds, type);
  const Label attack = label_of(type);
  std::vector<std::uint8_t> flags;
  std::size_t attacks = 0;
  for (const auto& r : filtered.records) {
    flags.push_back(r.label == attack);
    attacks += flags.back() ? 1 : 0;
  }
  if (attacks == 0 || attacks == filtered.size()) {
    fail(ErrorCode::Selection, "need both " + std::string(to_string(type)) + " and normal records");
  }
  const std::size_t d = ds.feature_names.size();
  if (top_k == 0 || top_k > d) fail(ErrorCode::Selection, "top_k must lie in [1, feature count]");

  std::vector<double> column(filtered.size());
  std::vector<double> stats(d);
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t r = 0; r < filtered.size(); ++r) column[r] = filtered.records[r].features[f];
    stats[f] = chi_square_statistic(column, flags);
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return stats[a] > stats[b]; });
  order.resize(top_k);
  return order;
}

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

std::vector<std::vector<double>> plus_plus_seeds(const std::vector<std::vector<double>>& points, std::size_t k,
                                                 Rng& rng) {
  std::vector<std::vector<double>> centroids;
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  centroids.push_back(points[first(rng)]);
  std::vector<double> d2(points.size(), std::numeric_limits<double>::infinity());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      d2[p] = std::min(d2[p], squared_distance(points[p], centroids.back()));
      total += d2[p];
    }
    if (total <= 0.0) {
      centroids.push_back(points[first(rng)]);
      continue;
    }
    double target = uniform(rng, 0.0, total);
    std::size_t pick = points.size() - 1;
    for (std::size_t p = 0; p < points.size(); ++p) {
      target -= d2[p];
      if (target < 0.0) {
        pick = p;
        break;
      }
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

std::size_t nearest(const std::vector<std::vector<double>>& centroids, std::span<const double> x) {
  std::size_t best = 0;
  double best_d = squared_distance(centroids[0], x);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = squared_distance(centroids[c], x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// Returns false when a cluster ends up empty.
bool lloyd(const std::vector<std::vector<double>>& points, const KMeansOptions& opts, KMeansResult& out) {
  const std::size_t dim = points[0].size();
  out.assignment.assign(points.size(), 0);
  out.inertia_history.clear();
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    double inertia = 0.0;
    std::vector<std::size_t> sizes(opts.k, 0);
    for (std::size_t p = 0; p < points.size(); ++p) {
      out.assignment[p] = nearest(out.centroids, points[p]);
      inertia += squared_distance(out.centroids[out.assignment[p]], points[p]);
      ++sizes[out.assignment[p]];
    }
    out.inertia_history.push_back(inertia);
    if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) return false;

    std::vector<std::vector<double>> next(opts.k, std::vector<double>(dim, 0.0));
    for (std::size_t p = 0; p < points.size(); ++p) {
      for (std::size_t j = 0; j < dim; ++j) next[out.assignment[p]][j] += points[p][j];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < opts.k; ++c) {
      for (std::size_t j = 0; j < dim; ++j) next[c][j] /= static_cast<double>(sizes[c]);
      shift = std::max(shift, std::sqrt(squared_distance(next[c], out.centroids[c])));
    }
    out.centroids = std::move(next);
    if (shift <= opts.tolerance) break;
  }
  // Final assignment against the converged centroids.
  double inertia = 0.0;
  std::vector<std::size_t> sizes(opts.k, 0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    out.assignment[p] = nearest(out.centroids, points[p]);
    inertia += squared_distance(out.centroids[out.assignment[p]], points[p]);
    ++sizes[out.assignment[p]];
  }
  out.inertia_history.push_back(inertia);
  return std::find(sizes.begin(), sizes.end(), 0) == sizes.end();
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, const KMeansOptions& opts, std::uint64_t seed) {
  if (opts.k == 0) fail(ErrorCode::Fitting, "k must be positive");
  if (points.size() < opts.k) {
    fail(ErrorCode::Fitting, "need at least " + std::to_string(opts.k) + " points, got " + std::to_string(points.size()));
  }
  for (std::size_t attempt = 0; attempt <= opts.max_reseeds; ++attempt) {
    Rng rng(derive_seed(derive_seed(seed, "kmeans"), attempt));
    KMeansResult result;
    result.centroids = plus_plus_seeds(points, opts.k, rng);
    if (lloyd(points, opts, result)) return result;
  }
  fail(ErrorCode::Fitting, "k-means left a cluster empty after " + std::to_string(opts.max_reseeds) + " re-seeds");
}

// ---------------------------------------------------------------------------
// Severity entries
// ---------------------------------------------------------------------------

namespace {

std::vector<double> project(const SeverityEntry& e, std::span<const double> features) {
  std::vector<double> z(e.features.size());
  for (std::size_t j = 0; j < e.features.size(); ++j) z[j] = (features[e.features[j]] - e.mean[j]) / e.scale[j];
  return z;
}

}  // namespace

SeverityLevel SeverityEntry::assess(std::span<const double> features) const {
  const std::vector<double> z = project(*this, features);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(centroids[c], z);
    if (d < best_d || (d == best_d && cluster_level[c] < cluster_level[best])) {
      best_d = d;
      best = c;
    }
  }
  return cluster_level[best];
}

SeverityEntry fit_severity(const Dataset& ds, AttackType type, std::uint64_t seed, const KMeansOptions& opts) {
  const Label attack = label_of(type);
  std::vector<const TelemetryRecord*> records;
  for (const auto& r : ds.records) {
    if (r.label == attack) records.push_back(&r);
  }
  if (records.size() < opts.k) {
    fail(ErrorCode::Fitting, "need at least " + std::to_string(opts.k) + " " + std::string(to_string(type)) +
                                 " records, got " + std::to_string(records.size()));
  }

  SeverityEntry e;
  e.features = chi_square_select(ds, type, std::min<std::size_t>(5, ds.feature_names.size()));
  const std::size_t m = e.features.size();
  // Centre on the attack records; scale by the spread of normal traffic so
  // distances count baseline-noise units and features without an intensity
  // signal stay small. Falls back to the attack spread without normal records.
  std::vector<const TelemetryRecord*> normal;
  for (const auto& r : ds.records) {
    if (r.label == Label::Normal) normal.push_back(&r);
  }
  auto spread = [](const std::vector<const TelemetryRecord*>& rows, std::size_t f, double& centre) {
    double sum = 0.0;
    for (const auto* r : rows) sum += r->features[f];
    centre = sum / static_cast<double>(rows.size());
    double var = 0.0;
    for (const auto* r : rows) var += (r->features[f] - centre) * (r->features[f] - centre);
    return std::sqrt(var / static_cast<double>(rows.size()));
  };
  e.mean.assign(m, 0.0);
  e.scale.assign(m, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double attack_sd = spread(records, e.features[j], e.mean[j]);
    double unused = 0.0;
    const double sd = normal.size() >= 2 ? spread(normal, e.features[j], unused) : attack_sd;
    e.scale[j] = sd > 1e-12 ? sd : (attack_sd > 1e-12 ? attack_sd : 1.0);
  }

  std::vector<std::vector<double>> points;
  points.reserve(records.size());
  for (const auto* r : records) points.push_back(project(e, r->features));
  KMeansResult km = kmeans(points, opts, seed);

  std::vector<double> severity(opts.k, 0.0);
  std::vector<std::size_t> count(opts.k, 0);
  for (std::size_t p = 0; p < records.size(); ++p) {
    severity[km.assignment[p]] += records[p]->intensity;
    ++count[km.assignment[p]];
  }
  for (std::size_t c = 0; c < opts.k; ++c) severity[c] /= static_cast<double>(count[c]);

  std::vector<std::size_t> rank(opts.k);
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return severity[a] < severity[b]; });
  // Reorder clusters ascending by severity; with k > 3 the upper ranks saturate at High.
  for (std::size_t pos = 0; pos < opts.k; ++pos) {
    const std::size_t c = rank[pos];
    e.centroids.push_back(km.centroids[c]);
    e.cluster_severity.push_back(severity[c]);
    const std::size_t level = opts.k == 1 ? 2 : std::min<std::size_t>(2, pos * 3 / opts.k);
    e.cluster_level.push_back(kAllSeverityLevels[level]);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

void SeverityModel::set(DatasetKind kind, AttackType type, SeverityEntry entry) {
  entries_[{kind, type}] = std::move(entry);
}

bool SeverityModel::contains(DatasetKind kind, AttackType type) const { return entries_.count({kind, type}) != 0; }

const SeverityEntry& SeverityModel::entry(DatasetKind kind, AttackType type) const {
  const auto it = entries_.find({kind, type});
  if (it == entries_.end()) {
    fail(ErrorCode::Assessment, "no severity entry for " + std::string(to_string(kind)) + "/" +
                                    std::string(to_string(type)));
  }
  return it->second;
}

std::pair<SeverityLevel, double> SeverityModel::assess(DatasetKind kind, AttackType type,
                                                       std::span<const double> features) const {
  const SeverityEntry& e = entry(kind, type);
  if (features.size() != feature_names(kind).size()) fail(ErrorCode::Assessment, "feature count does not match the schema");
  const SeverityLevel level = e.assess(features);
  return {level, numeric_level(level)};
}

Json SeverityModel::to_json() const {
  Json entries = Json::array();
  for (const auto& [key, e] : entries_) {
    Json levels = Json::array();
    for (SeverityLevel l : e.cluster_level) levels.push_back(std::string(to_string(l)));
    entries.push_back(Json{{"schema", std::string(to_string(key.first))},
                           {"attack", std::string(to_string(key.second))},
                           {"features", e.features},
                           {"mean", e.mean},
                           {"scale", e.scale},
                           {"centroids", e.centroids},
                           {"severity", e.cluster_severity},
                           {"levels", std::move(levels)}});
  }
  return Json{{"entries", std::move(entries)}};
}

SeverityModel SeverityModel::from_json(const Json& doc) {
  JsonCursor root(doc, "$");
  JsonCursor entries = root.at("entries");
  SeverityModel model;
  for (std::size_t k = 0; k < entries.array_size(); ++k) {
    JsonCursor cur = entries.at(k);
    const DatasetKind kind = parse_dataset_kind(cur.at("schema").string());
    const AttackType type = parse_attack_type(cur.at("attack").string());
    SeverityEntry e;
    try {
      e.features = cur.at("features").node().get<std::vector<std::size_t>>();
      e.mean = cur.at("mean").node().get<std::vector<double>>();
      e.scale = cur.at("scale").node().get<std::vector<double>>();
      e.centroids = cur.at("centroids").node().get<std::vector<std::vector<double>>>();
      e.cluster_severity = cur.at("severity").node().get<std::vector<double>>();
    } catch (const nlohmann::json::exception& ex) {
      cur.error(ex.what());
    }
    JsonCursor levels = cur.at("levels");
    for (std::size_t c = 0; c < levels.array_size(); ++c) e.cluster_level.push_back(parse_severity_level(levels.at(c).string()));

    const std::size_t width = feature_names(kind).size();
    const std::size_t m = e.features.size();
    if (m == 0 || e.mean.size() != m || e.scale.size() != m) cur.error("selected features and scaling disagree");
    for (std::size_t f : e.features) {
      if (f >= width) cur.at("features").error("feature index out of range");
    }
    if (e.centroids.empty() || e.cluster_severity.size() != e.centroids.size() ||
        e.cluster_level.size() != e.centroids.size()) {
      cur.error("cluster arrays disagree in length");
    }
    for (const auto& c : e.centroids) {
      if (c.size() != m) cur.at("centroids").error("centroid has the wrong dimension");
    }
    model.set(kind, type, std::move(e));
  }
  return model;
}

SeverityModel fit_severity_model(const Dataset& ds, std::uint64_t seed, const KMeansOptions& opts) {
  SeverityModel model;
  for (AttackType type : kAllAttackTypes) {
    const Label l = label_of(type);
    const bool present = std::any_of(ds.records.begin(), ds.records.end(), [&](const auto& r) { return r.label == l; });
    if (!present) continue;
    model.set(ds.kind, type, fit_severity(ds, type, derive_seed(seed, to_string(type)), opts));
  }
  return model;
}

}  // namespace secflow
