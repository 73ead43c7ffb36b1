#include <numeric>

#include "doctest.h"
#include "secflow/detection.hpp"
#include "secflow/errors.hpp"

using namespace secflow;

namespace {

Dataset toy(const std::vector<std::pair<std::vector<double>, Label>>& rows) {
  Dataset ds;
  ds.kind = DatasetKind::CLF;
  ds.feature_names = {"x", "y"};
  for (const auto& [f, l] : rows) ds.records.push_back(TelemetryRecord{f, l, 0.0});
  return ds;
}

// Four tight clusters in XOR layout.
Dataset xor_toy(std::uint64_t seed, std::size_t per_cluster) {
  Rng rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.05);
  std::vector<std::pair<std::vector<double>, Label>> rows;
  for (std::size_t k = 0; k < per_cluster; ++k) {
    for (int cx = 0; cx < 2; ++cx) {
      for (int cy = 0; cy < 2; ++cy) {
        rows.push_back({{cx + jitter(rng), cy + jitter(rng)}, (cx ^ cy) ? Label::DoS : Label::Normal});
      }
    }
  }
  return toy(rows);
}

double accuracy(const DetectorModel& m, const Dataset& ds) {
  std::size_t hit = 0;
  for (const auto& r : ds.records) hit += m.predict(r.features) == r.label ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(ds.size());
}

}  // namespace

TEST_CASE("metrics from a confusion matrix") {
  SUBCASE("perfect") {
    const std::vector<Label> t{Label::Normal, Label::DoS, Label::Probe};
    const auto m = metrics_from_predictions(t, t);
    CHECK(m.accuracy == 1.0);
    for (std::size_t k = 0; k < 3; ++k) CHECK(m.f1[k] == 1.0);
    for (double f : m.far) CHECK(f == 0.0);
  }
  SUBCASE("all normal on a 70/30 set") {
    std::vector<Label> truth(70, Label::Normal);
    truth.insert(truth.end(), 30, Label::DoS);
    const std::vector<Label> pred(100, Label::Normal);
    const auto m = metrics_from_predictions(truth, pred);
    CHECK(m.accuracy == doctest::Approx(0.7));
    CHECK(m.f1[index_of(Label::DoS)] == 0.0);
    CHECK(m.far[index_of(Label::DoS)] == 0.0);
    CHECK(m.support[index_of(Label::DoS)] == 30);
  }
  SUBCASE("shifted by one") {
    const std::vector<Label> t{Label::Normal, Label::DoS};
    const std::vector<Label> p{Label::DoS, Label::Normal};
    CHECK(metrics_from_predictions(t, p).accuracy == 0.0);
  }
  SUBCASE("false alarm rate counts other records flagged as the type") {
    // 4 normal, 2 probe; one normal and one probe predicted DoS.
    const std::vector<Label> t{Label::Normal, Label::Normal, Label::Normal, Label::Normal, Label::Probe, Label::Probe};
    const std::vector<Label> p{Label::DoS, Label::Normal, Label::Normal, Label::Normal, Label::DoS, Label::Probe};
    const auto m = metrics_from_predictions(t, p);
    CHECK(m.far[index_of(Label::DoS)] == doctest::Approx(2.0 / 6.0));
    CHECK(m.recall[index_of(Label::Probe)] == doctest::Approx(0.5));
  }
}

TEST_CASE("single-class training data") {
  const Dataset ds = toy({{{0, 0}, Label::Probe}, {{1, 1}, Label::Probe}, {{2, 5}, Label::Probe}});
  const auto rf = train_random_forest(ds, {5, 4, 1}, 1);
  CHECK(rf.predict(std::vector<double>{9, -3}) == Label::Probe);
  const auto lin = train_linear(ds);
  CHECK(lin.predict(std::vector<double>{9, -3}) == Label::Probe);
}

TEST_CASE("XOR needs depth, defeats a linear model") {
  const Dataset train = xor_toy(1, 25);
  const Dataset test = xor_toy(2, 25);
  CHECK(accuracy(train_random_forest(train, ForestParams{}, 3), test) == 1.0);
  CHECK(accuracy(train_linear(train), test) <= 0.75);
  // Two levels of splits are enough to represent the pattern exactly.
  const DecisionTree depth2({TreeNode{0, 0.5, 1, 2, {}}, TreeNode{1, 0.5, 3, 4, {}}, TreeNode{1, 0.5, 5, 6, {}},
                             TreeNode{-1, 0, -1, -1, {1, 0}}, TreeNode{-1, 0, -1, -1, {0, 1}},
                             TreeNode{-1, 0, -1, -1, {0, 1}}, TreeNode{-1, 0, -1, -1, {1, 0}}});
  for (const auto& r : test.records) CHECK(depth2.vote(r.features) == (r.label == Label::DoS ? 1u : 0u));
}

TEST_CASE("forest is deterministic and order-invariant") {
  const Dataset train = xor_toy(5, 20);
  const Dataset probe = xor_toy(6, 10);
  const auto a = train_random_forest(train, {15, 5, 2}, 77);
  const auto b = train_random_forest(train, {15, 5, 2}, 77);
  std::vector<std::size_t> order(a.trees().size());
  std::iota(order.rbegin(), order.rend(), 0);
  const auto rev = a.with_tree_order(order);
  for (const auto& r : probe.records) {
    CHECK(a.predict(r.features) == b.predict(r.features));
    CHECK(a.predict(r.features) == rev.predict(r.features));
  }
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("linear model on separable data") {
  Rng rng(4);
  std::normal_distribution<double> n01(0.0, 0.3);
  std::vector<std::pair<std::vector<double>, Label>> train_rows, test_rows;
  for (int k = 0; k < 200; ++k) {
    auto& rows = k < 150 ? train_rows : test_rows;
    rows.push_back({{n01(rng), n01(rng)}, Label::Normal});
    rows.push_back({{4 + n01(rng), 4 + n01(rng)}, Label::R2L});
  }
  const auto lin = train_linear(toy(train_rows));
  CHECK(accuracy(lin, toy(test_rows)) >= 0.99);
}

TEST_CASE("linear model survives a constant column and interpolates two points") {
  const Dataset constant = toy({{{1, 0}, Label::Normal}, {{1, 3}, Label::DoS}, {{1, 0.2}, Label::Normal}, {{1, 2.8}, Label::DoS}});
  const auto m = train_linear(constant);
  CHECK(accuracy(m, constant) == 1.0);
  const Dataset pair = toy({{{0, 0}, Label::Normal}, {{1, 1}, Label::U2R}});
  CHECK(accuracy(train_linear(pair), pair) == 1.0);
}

TEST_CASE("detector errors") {
  CHECK_THROWS_AS(train_random_forest(toy({}), {}, 1), Error);
  CHECK_THROWS_AS(train_random_forest(xor_toy(1, 2), {0, 3, 1}, 1), Error);
  const auto rf = train_random_forest(xor_toy(1, 5), {3, 3, 1}, 1);
  try {
    rf.predict(std::vector<double>{1, 2, 3});
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Prediction);
  }
  Dataset wrong = xor_toy(2, 2);
  wrong.kind = DatasetKind::NTD;
  CHECK_THROWS_AS(evaluate(rf, wrong), Error);
}

TEST_CASE("detector JSON round trip") {
  Dataset train = xor_toy(8, 10);
  train.feature_names.push_back("z");
  for (auto& r : train.records) r.features.push_back(0.5 * r.features[0]);
  for (const auto& m : {train_random_forest(train, {4, 3, 1}, 2), train_linear(train)}) {
    const DetectorModel back = DetectorModel::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    for (const auto& r : train.records) CHECK(back.predict(r.features) == m.predict(r.features));
  }
  CHECK_THROWS_AS(DetectorModel::from_json(Json{{"kind", "svm"}}), Error);
}
