#include "secflow/secflow.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "secflow/errors.hpp"
#include "secflow/experiment.hpp"
#include "secflow/scoring.hpp"

struct secflow_dataset {
  secflow::Dataset ds;
};
struct secflow_detector {
  secflow::DetectorModel model;
};
struct secflow_severity {
  secflow::SeverityModel model;
};
struct secflow_bundle {
  secflow::ModelBundle bundle;
};

namespace {

using secflow::ErrorCode;
using secflow::fail;
using secflow::Json;

thread_local std::string g_last_error;

secflow_status to_status(ErrorCode code) {
  return static_cast<secflow_status>(static_cast<int>(code) + 1);
}

template <typename F>
secflow_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SECFLOW_OK;
  } catch (const secflow::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return SECFLOW_E_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SECFLOW_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SECFLOW_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SECFLOW_E_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(name) + " must not be null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

Json parse_doc(const char* text) {
  if (!text) return Json::object();
  return secflow::parse_json_text(text);
}

secflow::SecurityVector cia(const double v[3]) { return secflow::SecurityVector{v[0], v[1], v[2]}; }

secflow::RunSpec spec_of(const char* config_json) { return secflow::run_spec_from_json(parse_doc(config_json)); }

secflow::Detectors detectors_of(const secflow_bundle* bundle) {
  return bundle ? bundle->bundle.view() : secflow::Detectors{};
}

Json metrics_json_of(const secflow::DetectionMetrics& m) {
  Json labels = Json::object();
  for (secflow::Label l : secflow::kAllLabels) {
    const std::size_t k = secflow::index_of(l);
    labels[std::string(secflow::to_string(l))] =
        Json{{"f1", m.f1[k]}, {"far", m.far[k]}, {"recall", m.recall[k]}, {"support", m.support[k]}};
  }
  return Json{{"accuracy", m.accuracy}, {"labels", std::move(labels)}};
}

}  // namespace

extern "C" {

const char* secflow_version(void) { return "1.0.0"; }

const char* secflow_status_name(secflow_status status) {
  switch (status) {
    case SECFLOW_OK: return "ok";
    case SECFLOW_E_INVALID_ARGUMENT: return "invalid_argument";
    case SECFLOW_E_PARSE: return "parse";
    case SECFLOW_E_VALIDATION: return "validation";
    case SECFLOW_E_CONFIG: return "config";
    case SECFLOW_E_UNSCHEDULABLE: return "unschedulable";
    case SECFLOW_E_KEY: return "key";
    case SECFLOW_E_TRAINING: return "training";
    case SECFLOW_E_EVALUATION: return "evaluation";
    case SECFLOW_E_PREDICTION: return "prediction";
    case SECFLOW_E_SELECTION: return "selection";
    case SECFLOW_E_FITTING: return "fitting";
    case SECFLOW_E_ASSESSMENT: return "assessment";
    case SECFLOW_E_DOMAIN: return "domain";
    case SECFLOW_E_NO_BACKUP: return "no_backup";
    case SECFLOW_E_IO: return "io";
    case SECFLOW_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* secflow_last_error(void) { return g_last_error.c_str(); }

void secflow_string_free(char* s) { std::free(s); }

// ---- Scoring ---------------------------------------------------------------

secflow_status secflow_attack_score(const double task[3], const double impact[3], double afr, double level,
                                    double* out) {
  return guarded([&] {
    need(task, "task");
    need(impact, "impact");
    need(out, "out");
    *out = secflow::attack_score(cia(task), cia(impact), afr, level);
  });
}

secflow_status secflow_mitigation_score(const double task[3], const double impact[3], const double mitigation[3],
                                        double* out) {
  return guarded([&] {
    need(task, "task");
    need(impact, "impact");
    need(mitigation, "mitigation");
    need(out, "out");
    *out = secflow::mitigation_score(cia(task), cia(impact), cia(mitigation));
  });
}

secflow_status secflow_normalize(const double* values, size_t n, double* out) {
  return guarded([&] {
    need(values, "values");
    need(out, "out");
    const std::vector<double> r = secflow::normalize(std::vector<double>(values, values + n));
    std::copy(r.begin(), r.end(), out);
  });
}

secflow_status secflow_adaptation_cost(const double weights[4], const double normalized[4], double* out) {
  return guarded([&] {
    need(weights, "weights");
    need(normalized, "normalized");
    need(out, "out");
    const secflow::CostWeights w{weights[0], weights[1], weights[2], weights[3]};
    *out = secflow::adaptation_cost(w, secflow::CostComponents{normalized[0], normalized[1], normalized[2],
                                                               normalized[3]});
  });
}

secflow_status secflow_reward(const double observed[4], const double lo[4], const double hi[4],
                              const double weights[4], double* out) {
  return guarded([&] {
    need(observed, "observed");
    need(lo, "lo");
    need(hi, "hi");
    need(weights, "weights");
    need(out, "out");
    auto attrs = [](const double v[4]) { return secflow::RewardAttributes{v[0], v[1], v[2], v[3]}; };
    const secflow::RewardWeights w{weights[0], weights[1], weights[2], weights[3]};
    w.validate();
    *out = secflow::reward(attrs(observed), attrs(lo), attrs(hi), w);
  });
}

// ---- Datasets --------------------------------------------------------------

secflow_status secflow_dataset_generate(const char* kind, size_t n, uint64_t seed, int three_bands,
                                        secflow_dataset** out) {
  return guarded([&] {
    need(kind, "kind");
    need(out, "out");
    secflow::GeneratorOptions opts;
    opts.three_bands = three_bands != 0;
    auto ds = secflow::generate(secflow::parse_dataset_kind(kind), n, secflow::default_attack_mix(), seed, opts);
    *out = new secflow_dataset{std::move(ds)};
  });
}

secflow_status secflow_dataset_load(const char* path, const char* meta_path, secflow_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream data(path);
    if (!data) fail(ErrorCode::Io, std::string("cannot read ") + path);
    std::ifstream meta;
    if (meta_path) {
      meta.open(meta_path);
      if (!meta) fail(ErrorCode::Io, std::string("cannot read ") + meta_path);
    }
    auto ds = secflow::read_csv(data, meta_path ? &meta : nullptr);
    *out = new secflow_dataset{std::move(ds)};
  });
}

secflow_status secflow_dataset_save(const secflow_dataset* ds, const char* path, const char* meta_path) {
  return guarded([&] {
    need(ds, "dataset");
    need(path, "path");
    std::ostringstream data;
    secflow::write_csv(ds->ds, data);
    secflow::write_text_file(path, data.str());
    if (meta_path) {
      std::ostringstream meta;
      secflow::write_meta_csv(ds->ds, meta);
      secflow::write_text_file(meta_path, meta.str());
    }
  });
}

secflow_status secflow_dataset_split(const secflow_dataset* ds, double train_fraction, uint64_t seed,
                                     secflow_dataset** train, secflow_dataset** test) {
  return guarded([&] {
    need(ds, "dataset");
    need(train, "train");
    need(test, "test");
    auto [a, b] = secflow::split(ds->ds, train_fraction, seed);
    auto* ta = new secflow_dataset{std::move(a)};
    try {
      *test = new secflow_dataset{std::move(b)};
    } catch (...) {
      delete ta;
      throw;
    }
    *train = ta;
  });
}

size_t secflow_dataset_size(const secflow_dataset* ds) { return ds ? ds->ds.size() : 0; }

size_t secflow_dataset_feature_count(const secflow_dataset* ds) { return ds ? ds->ds.feature_names.size() : 0; }

void secflow_dataset_free(secflow_dataset* ds) { delete ds; }

// ---- Detectors -------------------------------------------------------------

secflow_status secflow_detector_train(const secflow_dataset* train, const char* kind, uint64_t seed,
                                      secflow_detector** out) {
  return guarded([&] {
    need(train, "train");
    need(kind, "kind");
    need(out, "out");
    const std::string k(kind);
    if (k == "random_forest") {
      *out = new secflow_detector{secflow::train_random_forest(train->ds, {}, seed)};
    } else if (k == "linear") {
      *out = new secflow_detector{secflow::train_linear(train->ds)};
    } else {
      fail(ErrorCode::InvalidArgument, "unknown detector kind '" + k + "'");
    }
  });
}

secflow_status secflow_detector_predict(const secflow_detector* model, const double* features, size_t n,
                                        int* label) {
  return guarded([&] {
    need(model, "model");
    need(label, "label");
    if (n) need(features, "features");
    *label = static_cast<int>(secflow::index_of(model->model.predict(std::span<const double>(features, n))));
  });
}

secflow_status secflow_detector_evaluate(const secflow_detector* model, const secflow_dataset* test,
                                         char** metrics_json) {
  return guarded([&] {
    need(model, "model");
    need(test, "test");
    need(metrics_json, "metrics_json");
    *metrics_json = dup(metrics_json_of(secflow::evaluate(model->model, test->ds)).dump());
  });
}

secflow_status secflow_detector_to_json(const secflow_detector* model, char** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = dup(model->model.to_json().dump());
  });
}

secflow_status secflow_detector_from_json(const char* text, secflow_detector** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new secflow_detector{secflow::DetectorModel::from_json(secflow::parse_json_text(text))};
  });
}

void secflow_detector_free(secflow_detector* model) { delete model; }

// ---- Severity --------------------------------------------------------------

secflow_status secflow_severity_fit(const secflow_dataset* ds, uint64_t seed, secflow_severity** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    *out = new secflow_severity{secflow::fit_severity_model(ds->ds, seed)};
  });
}

secflow_status secflow_severity_assess(const secflow_severity* model, const char* kind, const char* attack,
                                       const double* features, size_t n, int* level, double* l) {
  return guarded([&] {
    need(model, "model");
    need(kind, "kind");
    need(attack, "attack");
    if (n) need(features, "features");
    const auto [lv, weight] = model->model.assess(secflow::parse_dataset_kind(kind),
                                                   secflow::parse_attack_type(attack),
                                                   std::span<const double>(features, n));
    if (level) *level = static_cast<int>(lv);
    if (l) *l = weight;
  });
}

secflow_status secflow_severity_to_json(const secflow_severity* model, char** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = dup(model->model.to_json().dump());
  });
}

secflow_status secflow_severity_from_json(const char* text, secflow_severity** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new secflow_severity{secflow::SeverityModel::from_json(secflow::parse_json_text(text))};
  });
}

void secflow_severity_free(secflow_severity* model) { delete model; }

// ---- Bundles ---------------------------------------------------------------

secflow_status secflow_bundle_train(const char* options_json, uint64_t seed, secflow_bundle** out) {
  return guarded([&] {
    need(out, "out");
    const Json doc = parse_doc(options_json);
    secflow::JsonCursor cur(doc, "$");
    secflow::TrainingOptions opts;
    auto count = [&](const char* key, std::size_t fallback) {
      const double x = cur.number_or(key, static_cast<double>(fallback));
      if (x < 1 || x != static_cast<double>(static_cast<std::size_t>(x))) {
        fail(ErrorCode::Config, std::string(key) + " must be a positive integer");
      }
      return static_cast<std::size_t>(x);
    };
    opts.records = count("records", opts.records);
    opts.train_fraction = cur.number_or("train_fraction", opts.train_fraction);
    opts.forest.n_trees = count("trees", opts.forest.n_trees);
    opts.forest.max_depth = count("max_depth", opts.forest.max_depth);
    opts.forest.min_leaf = count("min_leaf", opts.forest.min_leaf);
    *out = new secflow_bundle{secflow::train_default_bundle(opts, seed)};
  });
}

secflow_status secflow_bundle_create(const secflow_detector* ntd, const secflow_detector* clf,
                                     const secflow_severity* severity, secflow_bundle** out) {
  return guarded([&] {
    need(out, "out");
    secflow::ModelBundle b;
    if (ntd) b.ntd = ntd->model;
    if (clf) b.clf = clf->model;
    if (severity) b.severity = severity->model;
    // Round-trip through the document form so schema checks apply.
    *out = new secflow_bundle{secflow::bundle_from_json(secflow::bundle_to_json(b))};
  });
}

secflow_status secflow_bundle_to_json(const secflow_bundle* bundle, char** out) {
  return guarded([&] {
    need(bundle, "bundle");
    need(out, "out");
    *out = dup(secflow::bundle_to_json(bundle->bundle).dump());
  });
}

secflow_status secflow_bundle_from_json(const char* text, secflow_bundle** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new secflow_bundle{secflow::bundle_from_json(secflow::parse_json_text(text))};
  });
}

void secflow_bundle_free(secflow_bundle* bundle) { delete bundle; }

// ---- Generators ------------------------------------------------------------

secflow_status secflow_generate_multicloud(uint64_t seed, char** cloud_json) {
  return guarded([&] {
    need(cloud_json, "cloud_json");
    *cloud_json = dup(secflow::multicloud_to_json(secflow::generate_multicloud(seed)).dump(2));
  });
}

secflow_status secflow_generate_workflow(const char* cls, uint64_t seed, const char* cloud_json,
                                         char** workflow_json) {
  return guarded([&] {
    need(cls, "cls");
    need(workflow_json, "workflow_json");
    std::optional<secflow::MultiCloud> cloud;
    if (cloud_json) cloud = secflow::multicloud_from_json(secflow::parse_json_text(cloud_json));
    const auto wf = secflow::generate_workflow_class(secflow::parse_workflow_class(cls), seed,
                                                     cloud ? &*cloud : nullptr);
    *workflow_json = dup(secflow::workflow_to_json(wf).dump(2));
  });
}

// ---- Experiments -----------------------------------------------------------

secflow_status secflow_config_resolve(const char* config_json, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup(secflow::run_spec_to_json(spec_of(config_json)).dump(2));
  });
}

secflow_status secflow_simulate(const char* config_json, const secflow_bundle* bundle, const char* qtable_json,
                                char** aggregate_csv, char** event_log, char** qtable_out) {
  return guarded([&] {
    secflow::RunSpec spec = spec_of(config_json);
    if (event_log) spec.experiment.keep_logs = true;
    std::optional<secflow::QTable> warm;
    if (qtable_json) warm = secflow::QTable::from_json(secflow::parse_json_text(qtable_json));
    const auto cls = spec.classes.front();
    const secflow::Scenario s = secflow::resolve_scenario(spec, cls);
    const auto res = secflow::run_experiment(s.workflow, s.cloud, detectors_of(bundle), spec.experiment, s.trust,
                                             warm ? &*warm : nullptr);
    const auto strategy = spec.experiment.settings.tenant.strategy;
    std::string agg, log, table;
    if (aggregate_csv) {
      std::ostringstream o;
      secflow::write_aggregate_csv(secflow::aggregate_rows(res, strategy, cls), o);
      agg = o.str();
    }
    if (event_log) {
      std::ostringstream o;
      secflow::write_event_log(res, strategy, cls, o);
      log = o.str();
    }
    if (qtable_out && res.qtable) table = res.qtable->to_json().dump();
    emit(aggregate_csv, agg);
    emit(event_log, log);
    if (qtable_out) *qtable_out = res.qtable ? dup(table) : nullptr;
  });
}

secflow_status secflow_train_rl(const char* config_json, const secflow_bundle* bundle, char** qtable_out) {
  return guarded([&] {
    need(qtable_out, "qtable_out");
    secflow::RunSpec spec = spec_of(config_json);
    spec.experiment.settings.tenant.strategy = secflow::Strategy::Adaptive;
    const secflow::Scenario s = secflow::resolve_scenario(spec, spec.classes.front());
    const auto res = secflow::run_experiment(s.workflow, s.cloud, detectors_of(bundle), spec.experiment, s.trust);
    *qtable_out = dup(res.qtable->to_json().dump());
  });
}

secflow_status secflow_compare(const char* config_json, const secflow_bundle* bundle, char** aggregate_csv,
                               char** window_csv) {
  return guarded([&] {
    const secflow::RunSpec spec = spec_of(config_json);
    std::vector<secflow::AggregateRow> rows;
    for (auto cls : spec.classes) {
      const auto part = secflow::compare_scenario(secflow::resolve_scenario(spec, cls), detectors_of(bundle),
                                                  spec.experiment);
      rows.insert(rows.end(), part.aggregate.begin(), part.aggregate.end());
    }
    const auto windows = secflow::window_rows(rows, spec.experiment.window, spec.experiment.reward);
    std::ostringstream agg, win;
    secflow::write_aggregate_csv(rows, agg);
    secflow::write_window_csv(windows, win);
    const std::string a = agg.str();
    const std::string w = win.str();
    emit(aggregate_csv, a);
    emit(window_csv, w);
  });
}

secflow_status secflow_report(const char* aggregate_csv, const char* window_csv, const char* metrics_csv,
                              char** markdown) {
  return guarded([&] {
    need(markdown, "markdown");
    std::vector<secflow::AggregateRow> agg;
    std::vector<secflow::WindowRow> win;
    std::vector<std::vector<std::string>> metrics;
    if (aggregate_csv) {
      std::istringstream in(aggregate_csv);
      agg = secflow::read_aggregate_csv(in);
    }
    if (window_csv) {
      std::istringstream in(window_csv);
      win = secflow::read_window_csv(in);
    }
    if (metrics_csv) {
      std::istringstream in(metrics_csv);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        metrics.push_back(std::move(cells));
      }
    }
    *markdown = dup(secflow::render_report(agg, win, metrics_csv ? &metrics : nullptr));
  });
}

}  // extern "C"
