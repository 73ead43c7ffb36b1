#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include <unistd.h>

#include "doctest.h"
#include "secflow/secflow.h"

namespace {

struct StrFree {
  void operator()(char* s) const { secflow_string_free(s); }
};
using Str = std::unique_ptr<char, StrFree>;

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<secflow_dataset, Deleter<secflow_dataset, secflow_dataset_free>>;
using Detector = std::unique_ptr<secflow_detector, Deleter<secflow_detector, secflow_detector_free>>;
using Severity = std::unique_ptr<secflow_severity, Deleter<secflow_severity, secflow_severity_free>>;
using Bundle = std::unique_ptr<secflow_bundle, Deleter<secflow_bundle, secflow_bundle_free>>;

Str take(char* s) { return Str(s); }

std::size_t count_lines(const char* text) {
  std::size_t n = 0;
  for (const char* p = text; *p; ++p) n += *p == '\n' ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(secflow_version()) == "1.0.0");
  CHECK(std::string(secflow_status_name(SECFLOW_OK)) == "ok");
  CHECK(std::string(secflow_status_name(SECFLOW_E_DOMAIN)) != std::string(secflow_status_name(SECFLOW_E_PARSE)));
}

TEST_CASE("scoring entry points") {
  const double task[3] = {0.8, 0.6, 0.4};
  const double impact[3] = {0.5, 0.5, 0.5};
  double out = 0.0;
  REQUIRE(secflow_attack_score(task, impact, 0.8, 1.0, &out) == SECFLOW_OK);
  const double keep = (1 - 0.4) * (1 - 0.3) * (1 - 0.2);
  CHECK(out == doctest::Approx((1 - keep) * 0.8));

  const double mi[3] = {0.2, 0.2, 0.2};
  REQUIRE(secflow_mitigation_score(task, impact, mi, &out) == SECFLOW_OK);
  CHECK(out == doctest::Approx((0.6 + 0.7 + 0.8) * 0.2));

  double values[3] = {2, 4, 3};
  REQUIRE(secflow_normalize(values, 3, values) == SECFLOW_OK);
  CHECK(values[0] == 0.0);
  CHECK(values[1] == 1.0);
  CHECK(values[2] == doctest::Approx(0.5));

  const double w[4] = {0.25, 0.25, 0.25, 0.25};
  const double n[4] = {1, 1, 1, 1};
  REQUIRE(secflow_adaptation_cost(w, n, &out) == SECFLOW_OK);
  CHECK(out == 0.0);

  const double obs[4] = {1, 1, 1, 1}, lo[4] = {0, 0, 0, 0}, hi[4] = {2, 2, 2, 2};
  const double rw[4] = {-0.25, -0.25, 0.25, 0.25};
  REQUIRE(secflow_reward(obs, lo, hi, rw, &out) == SECFLOW_OK);
  CHECK(out == doctest::Approx(0.0));
}

TEST_CASE("errors map to status codes and set the thread's message") {
  const double task[3] = {1.5, 0, 0};
  const double impact[3] = {0.5, 0.5, 0.5};
  double out = -1.0;
  CHECK(secflow_attack_score(task, impact, 0.5, 1.0, &out) == SECFLOW_E_DOMAIN);
  CHECK(out == -1.0);
  CHECK(std::strlen(secflow_last_error()) > 0);

  CHECK(secflow_attack_score(nullptr, impact, 0.5, 1.0, &out) == SECFLOW_E_INVALID_ARGUMENT);
  CHECK(secflow_normalize(nullptr, 0, nullptr) == SECFLOW_E_INVALID_ARGUMENT);
  CHECK(secflow_normalize(impact, 0, &out) == SECFLOW_E_DOMAIN);

  secflow_dataset* ds = nullptr;
  CHECK(secflow_dataset_generate("pcap", 10, 1, 0, &ds) != SECFLOW_OK);
  CHECK(ds == nullptr);
  CHECK(secflow_dataset_load("/nonexistent/data.csv", nullptr, &ds) == SECFLOW_E_IO);

  char* text = nullptr;
  CHECK(secflow_config_resolve("{\"runz\": 3}", &text) == SECFLOW_E_CONFIG);
  CHECK(std::string(secflow_last_error()).find("runz") != std::string::npos);
  CHECK(secflow_config_resolve("{not json", &text) == SECFLOW_E_PARSE);
  CHECK(text == nullptr);

  secflow_detector* det = nullptr;
  CHECK(secflow_detector_from_json("{\"kind\": \"svm\"}", &det) != SECFLOW_OK);
  CHECK(det == nullptr);

  // A later success leaves the call status clean.
  REQUIRE(secflow_attack_score(impact, impact, 0.5, 1.0, &out) == SECFLOW_OK);
}

TEST_CASE("free functions accept null") {
  secflow_dataset_free(nullptr);
  secflow_detector_free(nullptr);
  secflow_severity_free(nullptr);
  secflow_bundle_free(nullptr);
  secflow_string_free(nullptr);
}

TEST_CASE("dataset, detector and severity handles") {
  secflow_dataset* raw = nullptr;
  REQUIRE(secflow_dataset_generate("clf", 600, 7, 1, &raw) == SECFLOW_OK);
  Dataset ds(raw);
  CHECK(secflow_dataset_size(ds.get()) == 600);
  CHECK(secflow_dataset_feature_count(ds.get()) == 3);

  secflow_dataset *tr = nullptr, *te = nullptr;
  REQUIRE(secflow_dataset_split(ds.get(), 0.8, 7, &tr, &te) == SECFLOW_OK);
  Dataset train(tr), test(te);
  CHECK(secflow_dataset_size(train.get()) + secflow_dataset_size(test.get()) == 600);

  secflow_detector* d = nullptr;
  REQUIRE(secflow_detector_train(train.get(), "random_forest", 3, &d) == SECFLOW_OK);
  Detector rf(d);
  char* metrics = nullptr;
  REQUIRE(secflow_detector_evaluate(rf.get(), test.get(), &metrics) == SECFLOW_OK);
  Str m = take(metrics);
  CHECK(std::string(m.get()).find("\"accuracy\"") != std::string::npos);

  const double probe[3] = {0.2, 0.3, 0.1};
  int label = -1;
  REQUIRE(secflow_detector_predict(rf.get(), probe, 3, &label) == SECFLOW_OK);
  CHECK(label >= 0);
  CHECK(label < 5);
  CHECK(secflow_detector_predict(rf.get(), probe, 2, &label) == SECFLOW_E_PREDICTION);

  char* json = nullptr;
  REQUIRE(secflow_detector_to_json(rf.get(), &json) == SECFLOW_OK);
  Str doc = take(json);
  REQUIRE(secflow_detector_from_json(doc.get(), &d) == SECFLOW_OK);
  Detector back(d);
  int again = -1;
  REQUIRE(secflow_detector_predict(back.get(), probe, 3, &again) == SECFLOW_OK);
  CHECK(again == label);

  secflow_severity* s = nullptr;
  REQUIRE(secflow_severity_fit(ds.get(), 5, &s) == SECFLOW_OK);
  Severity sev(s);
  int level = -1;
  double l = 0.0;
  REQUIRE(secflow_severity_assess(sev.get(), "clf", "dos", probe, 3, &level, &l) == SECFLOW_OK);
  CHECK(level >= 0);
  CHECK(level <= 2);
  CHECK(l == doctest::Approx((level + 1) / 3.0));
  CHECK(secflow_severity_assess(sev.get(), "clf", "worm", probe, 3, &level, &l) != SECFLOW_OK);

  secflow_bundle* b = nullptr;
  CHECK(secflow_bundle_create(rf.get(), nullptr, sev.get(), &b) == SECFLOW_E_PARSE);
  CHECK(b == nullptr);
  REQUIRE(secflow_bundle_create(nullptr, rf.get(), sev.get(), &b) == SECFLOW_OK);
  Bundle bundle(b);
  REQUIRE(secflow_bundle_to_json(bundle.get(), &json) == SECFLOW_OK);
  Str bdoc = take(json);
  REQUIRE(secflow_bundle_from_json(bdoc.get(), &b) == SECFLOW_OK);
  Bundle(b).reset();
}

TEST_CASE("dataset files round trip") {
  secflow_dataset* raw = nullptr;
  REQUIRE(secflow_dataset_generate("ntd", 50, 2, 0, &raw) == SECFLOW_OK);
  Dataset ds(raw);
  const std::string path =
      (std::filesystem::temp_directory_path() / ("secflow_capi_" + std::to_string(::getpid()) + ".csv")).string();
  const std::string meta = path + ".meta.csv";
  REQUIRE(secflow_dataset_save(ds.get(), path.c_str(), meta.c_str()) == SECFLOW_OK);
  REQUIRE(secflow_dataset_load(path.c_str(), meta.c_str(), &raw) == SECFLOW_OK);
  Dataset back(raw);
  CHECK(secflow_dataset_size(back.get()) == 50);
  CHECK(secflow_dataset_feature_count(back.get()) == 8);
  std::remove(path.c_str());
  std::remove(meta.c_str());
}

TEST_CASE("generators and experiments") {
  char* cloud = nullptr;
  REQUIRE(secflow_generate_multicloud(3, &cloud) == SECFLOW_OK);
  Str c = take(cloud);
  char* wf = nullptr;
  REQUIRE(secflow_generate_workflow("small", 3, c.get(), &wf) == SECFLOW_OK);
  Str w = take(wf);
  CHECK(std::string(w.get()).find("\"tasks\"") != std::string::npos);
  CHECK(secflow_generate_workflow("huge", 3, nullptr, &wf) != SECFLOW_OK);

  const char* cfg = R"({"runs": 20, "window": 10, "warmup_runs": 5, "calibration_runs": 5,
                        "detection": "always", "classes": ["small"]})";
  char *agg = nullptr, *log = nullptr, *q = nullptr;
  REQUIRE(secflow_simulate(cfg, nullptr, nullptr, &agg, &log, &q) == SECFLOW_OK);
  Str a = take(agg), l = take(log), qt = take(q);
  CHECK(count_lines(a.get()) == 21);

  char* win = nullptr;
  REQUIRE(secflow_compare(cfg, nullptr, &agg, &win) == SECFLOW_OK);
  Str ca = take(agg), cw = take(win);
  CHECK(count_lines(ca.get()) == 41);
  CHECK(count_lines(cw.get()) == 5);

  char* md = nullptr;
  REQUIRE(secflow_report(ca.get(), cw.get(), nullptr, &md) == SECFLOW_OK);
  Str report = take(md);
  CHECK(std::string(report.get()).find("| small |") != std::string::npos);

  // Models mode without a bundle is a configuration error, reported before any run.
  CHECK(secflow_simulate(R"({"runs": 2, "classes": ["small"]})", nullptr, nullptr, &agg, nullptr, nullptr) !=
        SECFLOW_OK);
}
