#include <sstream>

#include "doctest.h"
#include "secflow/errors.hpp"
#include "secflow/experiment.hpp"

using namespace secflow;

namespace {

AggregateRow row(std::size_t run, Strategy s, WorkflowClass c, Totals t) {
  AggregateRow r;
  r.run = run;
  r.strategy = s;
  r.cls = c;
  r.totals = t;
  return r;
}

}  // namespace

TEST_CASE("aggregate CSV round trip") {
  std::vector<AggregateRow> rows = {row(0, Strategy::LowestCost, WorkflowClass::Small, {1.5, 20.25, 0.7, 1.1}),
                                    row(1, Strategy::Adaptive, WorkflowClass::Large, {2, 30, 0.1, 0})};
  rows[1].injected = 4;
  rows[1].detected = 3;
  rows[1].adapted = 2;
  rows[1].failed = 1;
  std::ostringstream out;
  write_aggregate_csv(rows, out);
  CHECK(out.str().rfind("run,strategy,class,price,time,value,mitigation,injected,detected,adapted,failed\n", 0) == 0);
  std::istringstream in(out.str());
  const auto back = read_aggregate_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[1].strategy == Strategy::Adaptive);
  CHECK(back[1].cls == WorkflowClass::Large);
  CHECK(back[0].totals.time == 20.25);
  CHECK(back[1].failed == 1);
  std::istringstream bad("run,strategy\n0,x\n");
  CHECK_THROWS_AS(read_aggregate_csv(bad), Error);
}

TEST_CASE("composite rewards pool ranges per class") {
  const std::vector<AggregateRow> rows = {
      row(0, Strategy::LowestCost, WorkflowClass::Small, {1, 10, 0, 0}),
      row(0, Strategy::Adaptive, WorkflowClass::Small, {3, 20, 2, 4}),
      row(1, Strategy::Adaptive, WorkflowClass::Small, {2, 15, 1, 2}),
      row(0, Strategy::LowestCost, WorkflowClass::Large, {100, 100, 100, 100}),
  };
  const auto r = composite_rewards(rows, RewardWeights{});
  CHECK(r[0] == doctest::Approx(0.0));
  CHECK(r[1] == doctest::Approx(-0.25 - 0.25 + 0.25 + 0.25));
  CHECK(r[2] == doctest::Approx(-0.125 - 0.125 + 0.125 + 0.125));
  CHECK(r[3] == 0.0);  // a single row has no spread
}

TEST_CASE("rolling windows") {
  std::vector<AggregateRow> rows;
  for (std::size_t k = 0; k < 25; ++k) rows.push_back(row(k, Strategy::LowestCost, WorkflowClass::Medium, {double(k), 1, 1, 1}));
  const auto w = window_rows(rows, 10, RewardWeights{});
  REQUIRE(w.size() == 3);
  CHECK(w[0].window == 1);
  CHECK(w[0].first_run == 0);
  CHECK(w[0].last_run == 9);
  CHECK(w[0].mean.price == doctest::Approx(4.5));
  CHECK(w[2].mean.price == doctest::Approx(22));
  // Price rewards are -0.25 * k / 24, averaged per window.
  CHECK(w[0].reward == doctest::Approx(-0.25 * 4.5 / 24));
  std::ostringstream out;
  write_window_csv(w, out);
  std::istringstream in(out.str());
  const auto back = read_window_csv(in);
  REQUIRE(back.size() == 3);
  CHECK(back[2].last_run == 24);
  CHECK(back[0].reward == doctest::Approx(w[0].reward));
  CHECK_THROWS_AS(window_rows(rows, 0, RewardWeights{}), Error);
}

TEST_CASE("report is rendered from tables alone") {
  const std::vector<AggregateRow> rows = {row(0, Strategy::LowestCost, WorkflowClass::Small, {1, 10, 0.5, 1}),
                                          row(0, Strategy::Adaptive, WorkflowClass::Small, {2, 12, 0.5, 1})};
  const std::string md = render_report(rows, window_rows(rows, 100, RewardWeights{}));
  CHECK(md.find("| small | lowest-cost |") != std::string::npos);
  CHECK(md.find("| small | adaptive |") != std::string::npos);
}

TEST_CASE("settings documents are strict") {
  const RunSpec spec = run_spec_from_json(Json::object());
  CHECK(spec.experiment.n_runs == 1000);
  CHECK(spec.experiment.settings.attack_rate == 0.3);
  CHECK(spec.classes.size() == 3);
  const Json doc = run_spec_to_json(spec);
  CHECK(run_spec_to_json(run_spec_from_json(doc)) == doc);

  const RunSpec custom = run_spec_from_json(Json{{"runs", 10}, {"attack_rate", 0.0}, {"classes", {"medium"}},
                                                 {"strategy", "adaptive"}, {"rl", {{"alpha", 0.5}}}});
  CHECK(custom.experiment.n_runs == 10);
  CHECK(custom.classes == std::vector<WorkflowClass>{WorkflowClass::Medium});
  CHECK(custom.experiment.settings.tenant.strategy == Strategy::Adaptive);
  CHECK(custom.experiment.rl.alpha == 0.5);

  for (const Json& bad : {Json{{"runz", 10}}, Json{{"attack_rate", 2}}, Json{{"classes", {"huge"}}},
                          Json{{"rl", {{"gamma", 1.0}}}}, Json{{"seed", "x"}}}) {
    try {
      run_spec_from_json(bad);
      FAIL("accepted " << bad.dump());
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Config);
    }
  }
}

TEST_CASE("scenarios honour fixed parts") {
  RunSpec spec;
  const Scenario a = resolve_scenario(spec, WorkflowClass::Small);
  const Scenario b = make_scenario(WorkflowClass::Small, spec.scenario_seed);
  CHECK(a.workflow == b.workflow);
  CHECK(a.cloud == b.cloud);
  spec.workflow = make_scenario(WorkflowClass::Large, 9).workflow;
  CHECK(resolve_scenario(spec, WorkflowClass::Small).workflow == *spec.workflow);
}

TEST_CASE("model bundles") {
  TrainingOptions opts;
  opts.records = 1500;
  opts.forest.n_trees = 5;
  const ModelBundle bundle = train_default_bundle(opts, 3);
  REQUIRE(bundle.ntd.has_value());
  REQUIRE(bundle.clf.has_value());
  REQUIRE(bundle.severity.has_value());
  const Json doc = bundle_to_json(bundle);
  CHECK(bundle_to_json(bundle_from_json(doc)) == doc);
  Json wrong = doc;
  wrong["version"] = 99;
  CHECK_THROWS_AS(bundle_from_json(wrong), Error);
  Json swapped = doc;
  std::swap(swapped["ntd"], swapped["clf"]);
  CHECK_THROWS_AS(bundle_from_json(swapped), Error);
  const Detectors d = bundle.view();
  CHECK(d.ntd == &*bundle.ntd);
}

TEST_CASE("comparison covers both strategies and writes an event log") {
  ExperimentConfig cfg;
  cfg.n_runs = 30;
  cfg.window = 10;
  cfg.warmup_runs = 5;
  cfg.calibration_runs = 5;
  cfg.keep_logs = true;
  cfg.settings.mode = DetectionMode::AlwaysDetect;
  const ComparisonResult r = run_comparison({WorkflowClass::Small}, {}, cfg, 7);
  CHECK(r.aggregate.size() == 60);
  CHECK(r.windows.size() == 6);
  CHECK(r.qtables.size() == 1);

  const Scenario sc = make_scenario(WorkflowClass::Small, 7);
  ExperimentConfig one = cfg;
  one.settings.tenant.strategy = Strategy::LowestCost;
  const ExperimentResult res = run_experiment(sc.workflow, sc.cloud, {}, one, sc.trust);
  std::ostringstream log;
  write_event_log(res, Strategy::LowestCost, WorkflowClass::Small, log);
  std::istringstream lines(log.str());
  std::string line;
  std::size_t runs = 0;
  while (std::getline(lines, line)) {
    const Json j = Json::parse(line);
    runs += j.at("event") == "run" ? 1 : 0;
  }
  CHECK(runs == 30);
}
