#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "secflow/datagen.hpp"
#include "secflow/errors.hpp"

using namespace secflow;

namespace {

std::size_t count(const Dataset& ds, Label l) {
  return static_cast<std::size_t>(
      std::count_if(ds.records.begin(), ds.records.end(), [&](const auto& r) { return r.label == l; }));
}

std::string csv_of(const Dataset& ds) {
  std::ostringstream out;
  write_csv(ds, out);
  return out.str();
}

// Best single-threshold classifier on one feature, found by scanning every cut.
double best_stump_accuracy(const Dataset& ds, std::size_t feature) {
  std::vector<std::pair<double, bool>> pts;
  for (const auto& r : ds.records) pts.emplace_back(r.features[feature], r.label != Label::Normal);
  std::sort(pts.begin(), pts.end());
  const std::size_t n = pts.size();
  std::size_t total_pos = 0;
  for (const auto& p : pts) total_pos += p.second ? 1 : 0;
  std::size_t left_pos = 0;
  std::size_t best = std::max(total_pos, n - total_pos);
  for (std::size_t k = 0; k < n; ++k) {
    left_pos += pts[k].second ? 1 : 0;
    if (k + 1 < n && pts[k].first == pts[k + 1].first) continue;
    const std::size_t left = k + 1;
    const std::size_t left_neg = left - left_pos;
    const std::size_t right_pos = total_pos - left_pos;
    const std::size_t right_neg = (n - left) - right_pos;
    best = std::max(best, std::max(left_neg + right_pos, left_pos + right_neg));
  }
  return static_cast<double>(best) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("feature schemas") {
  CHECK(feature_names(DatasetKind::NTD).size() == 8);
  CHECK(feature_names(DatasetKind::CLF) == std::vector<std::string>{"cpu_util", "ram_util", "bw_util"});
  double total = 0;
  for (const auto& [l, f] : default_attack_mix()) total += f;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("pure normal mix") {
  const Dataset ds = generate(DatasetKind::NTD, 100, {{Label::Normal, 1.0}}, 1);
  CHECK(ds.size() == 100);
  for (const auto& r : ds.records) {
    CHECK(r.label == Label::Normal);
    CHECK(r.intensity == 0.0);
  }
}

TEST_CASE("label counts use largest remainder") {
  const Dataset ds = generate(DatasetKind::CLF, 7, {{Label::Normal, 0.5}, {Label::DoS, 0.3}, {Label::Probe, 0.2}}, 3);
  CHECK(count(ds, Label::Normal) == 4);
  CHECK(count(ds, Label::DoS) == 2);
  CHECK(count(ds, Label::Probe) == 1);
}

TEST_CASE("generation is deterministic under seed") {
  const AttackMix mix = default_attack_mix();
  CHECK(csv_of(generate(DatasetKind::NTD, 500, mix, 9)) == csv_of(generate(DatasetKind::NTD, 500, mix, 9)));
  CHECK(csv_of(generate(DatasetKind::NTD, 500, mix, 9)) != csv_of(generate(DatasetKind::NTD, 500, mix, 10)));
}

TEST_CASE("generator errors") {
  CHECK_THROWS_AS(generate(DatasetKind::NTD, 0, default_attack_mix(), 1), Error);
  CHECK_THROWS_AS(generate(DatasetKind::NTD, 10, {{Label::Normal, 0.5}, {Label::DoS, 0.3}}, 1), Error);
}

TEST_CASE("a single stump separates DoS from normal traffic") {
  const Dataset ds = generate(DatasetKind::NTD, 10000, {{Label::Normal, 0.7}, {Label::DoS, 0.3}}, 42);
  double best = 0;
  for (std::size_t f = 0; f < ds.feature_names.size(); ++f) best = std::max(best, best_stump_accuracy(ds, f));
  CHECK(best >= 0.95);
}

TEST_CASE("three-band intensities stay inside their bands") {
  GeneratorOptions opts;
  opts.three_bands = true;
  const Dataset ds = generate(DatasetKind::NTD, 2000, default_attack_mix(), 5, opts);
  for (const auto& r : ds.records) {
    if (r.label == Label::Normal) continue;
    const double centres[] = {1.0 / 6, 0.5, 5.0 / 6};
    bool inside = false;
    for (double c : centres) inside = inside || std::abs(r.intensity - c) <= opts.band_half_width + 1e-12;
    CHECK(inside);
  }
}

TEST_CASE("stratified split") {
  const Dataset ds = generate(DatasetKind::CLF, 100, {{Label::Normal, 0.7}, {Label::DoS, 0.3}}, 2);
  const auto [train, test] = split(ds, 0.8, 4);
  CHECK(train.size() == 80);
  CHECK(test.size() == 20);
  CHECK(count(train, Label::DoS) == 24);
  const auto again = split(ds, 0.8, 4);
  CHECK(csv_of(again.first) == csv_of(train));
  CHECK_THROWS_AS(split(ds, 1.0, 4), Error);
  Dataset tiny = generate(DatasetKind::CLF, 10, {{Label::Normal, 1.0}}, 2);
  Rng rng(1);
  tiny.records.push_back(synthesize_record(DatasetKind::CLF, Label::DoS, 0.5, rng));
  CHECK_THROWS_AS(split(tiny, 0.8, 4), Error);
}

TEST_CASE("filter keeps one attack type and normal traffic") {
  const Dataset ds = generate(DatasetKind::NTD, 1000, default_attack_mix(), 8);
  const Dataset f = filter_attack(ds, AttackType::Probe);
  CHECK(f.size() == count(ds, Label::Normal) + count(ds, Label::Probe));
  CHECK(count(f, Label::DoS) == 0);
}

TEST_CASE("CSV round trip with the intensity companion") {
  const Dataset ds = generate(DatasetKind::NTD, 50, default_attack_mix(), 11);
  std::ostringstream data, meta;
  write_csv(ds, data);
  write_meta_csv(ds, meta);
  CHECK(data.str().rfind("duration,", 0) == 0);
  std::istringstream din(data.str()), min(meta.str());
  const Dataset back = read_csv(din, &min);
  REQUIRE(back.size() == ds.size());
  CHECK(back.kind == DatasetKind::NTD);
  for (std::size_t k = 0; k < ds.size(); ++k) {
    CHECK(back.records[k].features == ds.records[k].features);
    CHECK(back.records[k].label == ds.records[k].label);
    CHECK(back.records[k].intensity == ds.records[k].intensity);
  }
  std::istringstream bad("a,b,label\n1,2,normal\n");
  CHECK_THROWS_AS(read_csv(bad), Error);
}
