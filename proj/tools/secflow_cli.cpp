// Command-line front end over the C API.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "secflow/secflow.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(secflow_status st) {
  if (st != SECFLOW_OK) throw Failure(std::string(secflow_status_name(st)) + ": " + secflow_last_error());
}

struct CString {
  char* p = nullptr;
  CString() = default;
  CString(const CString&) = delete;
  CString& operator=(const CString&) = delete;
  ~CString() { secflow_string_free(p); }
  char** out() { return &p; }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(Handle&& other) noexcept : p(std::exchange(other.p, nullptr)) {}
  Handle& operator=(Handle&&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
};
using Dataset = Handle<secflow_dataset, secflow_dataset_free>;
using Detector = Handle<secflow_detector, secflow_detector_free>;
using Severity = Handle<secflow_severity, secflow_severity_free>;
using Bundle = Handle<secflow_bundle, secflow_bundle_free>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure("cannot write " + path.string());
  out << text;
  if (!out) throw Failure("cannot write " + path.string());
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Failure(what + ": " + e.what());
  }
}

// --set a.b=value; value is JSON when it parses as JSON, a string otherwise.
void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw Failure("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &doc;
  std::istringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (!node->is_object()) throw Failure("--set " + key + ": '" + path[k] + "' is not an object");
    node = &(*node)[path[k]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw Failure("--set " + key + ": parent is not an object");
  (*node)[path.back()] = value;
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("SECFLOW_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Failure(std::string("SECFLOW_SEED is not an unsigned integer: '") + s + "'");
  }
}

std::uint64_t seed_or(std::optional<std::uint64_t> flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (auto e = env_seed()) return *e;
  return fallback;
}

// Options shared by the experiment subcommands.
struct ExperimentArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string models;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<double> rate;
  std::string strategy;
  std::vector<std::string> classes;
  std::string workflow;
  std::string cloud;
  std::string out = "out";

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON settings file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "Override a setting, key=value (dotted keys)");
    app->add_option("-m,--models", models, "Model bundle JSON (trained in-process when absent)")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Experiment seed");
    app->add_option("--runs", runs, "Runs per strategy");
    app->add_option("--rate", rate, "Per-task attack probability");
    app->add_option("--strategy", strategy, "lowest-cost or adaptive");
    app->add_option("--class", classes, "Workflow class: small, medium or large");
    app->add_option("--workflow", workflow, "Fixed workflow JSON")->check(CLI::ExistingFile);
    app->add_option("--cloud", cloud, "Fixed multi-cloud JSON")->check(CLI::ExistingFile);
    app->add_option("-o,--out", out, "Output directory");
  }

  // Precedence: file, then SECFLOW_SEED, then flags and --set.
  std::string document() const {
    json doc = config.empty() ? json::object() : parse_json(read_file(config), config);
    if (!doc.is_object()) throw Failure(config + ": settings must be a JSON object");
    if (auto e = env_seed()) doc["seed"] = *e;
    if (seed) doc["seed"] = *seed;
    if (runs) doc["runs"] = *runs;
    if (rate) doc["attack_rate"] = *rate;
    if (!strategy.empty()) doc["strategy"] = strategy;
    if (!classes.empty()) doc["classes"] = classes;
    if (!workflow.empty()) doc["workflow"] = parse_json(read_file(workflow), workflow);
    if (!cloud.empty()) doc["cloud"] = parse_json(read_file(cloud), cloud);
    for (const auto& s : sets) apply_override(doc, s);
    CString resolved;
    check(secflow_config_resolve(doc.dump().c_str(), resolved.out()));
    return resolved.str();
  }

  // Models are needed only for model-driven detection.
  void load_models(Bundle& bundle, const std::string& doc) const {
    if (!models.empty()) {
      check(secflow_bundle_from_json(read_file(models).c_str(), bundle.out()));
      return;
    }
    const json settings = json::parse(doc);
    if (settings.value("detection", std::string("models")) != "models") return;
    const std::uint64_t s = settings.value("seed", std::uint64_t{42});
    std::cerr << "training detection models (seed " << s << ")\n";
    check(secflow_bundle_train(nullptr, s, bundle.out()));
  }
};

const char* const kLabels[] = {"normal", "dos", "probe", "u2r", "r2l"};

std::string metrics_header() {
  std::string h = "dataset,model,accuracy";
  for (const char* l : kLabels) h += std::string(",f1_") + l;
  for (int k = 1; k < 5; ++k) h += std::string(",far_") + kLabels[k];
  return h + "\n";
}

std::string metrics_row(const std::string& dataset, const std::string& model, const json& m) {
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return std::string(buf);
  };
  std::string row = dataset + "," + model + "," + num(m.at("accuracy").get<double>());
  for (const char* l : kLabels) row += "," + num(m.at("labels").at(l).at("f1").get<double>());
  for (int k = 1; k < 5; ++k) row += "," + num(m.at("labels").at(kLabels[k]).at("far").get<double>());
  return row + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security-aware multi-cloud workflow adaptation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(secflow_version()));

  // gen-data
  std::string gd_kind = "ntd";
  std::size_t gd_rows = 10000;
  std::optional<std::uint64_t> gd_seed;
  bool gd_bands = false;
  std::string gd_out;
  std::string gd_meta;
  auto* gen = app.add_subcommand("gen-data", "Generate a labelled telemetry dataset");
  gen->add_option("--kind", gd_kind, "ntd or clf")->check(CLI::IsMember({"ntd", "clf"}));
  gen->add_option("--rows", gd_rows, "Number of records")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gd_seed, "Generator seed");
  gen->add_flag("--three-bands", gd_bands, "Draw intensities from three narrow bands");
  gen->add_option("-o,--out", gd_out, "Output CSV")->required();
  gen->add_option("--meta", gd_meta, "Companion intensity CSV (default <out>.meta.csv)");

  // train-detect
  std::vector<std::string> td_data;
  std::size_t td_rows = 10000;
  std::optional<std::uint64_t> td_seed;
  double td_fraction = 0.8;
  std::string td_out = "out";
  auto* tdet = app.add_subcommand("train-detect", "Train random-forest and linear detectors and report metrics");
  tdet->add_option("--data", td_data, "Dataset CSV(s); NTD and CLF are generated when absent")
      ->check(CLI::ExistingFile);
  tdet->add_option("--rows", td_rows, "Rows per generated dataset")->check(CLI::PositiveNumber);
  tdet->add_option("--seed", td_seed, "Seed");
  tdet->add_option("--train-fraction", td_fraction, "Training share of each dataset");
  tdet->add_option("-o,--out", td_out, "Output directory");

  // train-severity
  std::vector<std::string> ts_data;
  std::size_t ts_rows = 10000;
  std::optional<std::uint64_t> ts_seed;
  std::string ts_out = "out/severity.json";
  std::string ts_models;
  auto* tsev = app.add_subcommand("train-severity", "Fit per-attack severity clusters");
  tsev->add_option("--data", ts_data, "Dataset CSV(s) with <csv>.meta.csv companions")->check(CLI::ExistingFile);
  tsev->add_option("--rows", ts_rows, "Rows per generated dataset")->check(CLI::PositiveNumber);
  tsev->add_option("--seed", ts_seed, "Seed");
  tsev->add_option("-o,--out", ts_out, "Severity model JSON");
  tsev->add_option("--models", ts_models, "Model bundle to update with the severity model")
      ->check(CLI::ExistingFile);

  ExperimentArgs rl_args;
  auto* trl = app.add_subcommand("train-rl", "Learn a Q-table with the Adaptive strategy");
  rl_args.attach(trl);

  ExperimentArgs sim_args;
  std::string sim_qtable;
  auto* sim = app.add_subcommand("simulate", "Run one strategy and write per-run aggregates and event log");
  sim_args.attach(sim);
  sim->add_option("--qtable", sim_qtable, "Warm-start Q-table JSON")->check(CLI::ExistingFile);

  ExperimentArgs cmp_args;
  auto* cmp = app.add_subcommand("compare", "Lowest-Cost against Adaptive over workflow classes");
  cmp_args.attach(cmp);

  std::string rp_aggregate;
  std::string rp_windows;
  std::string rp_metrics;
  std::string rp_out = "out/report.md";
  auto* rep = app.add_subcommand("report", "Markdown summary of emitted CSVs");
  rep->add_option("--aggregate", rp_aggregate, "Aggregate CSV")->check(CLI::ExistingFile);
  rep->add_option("--windows", rp_windows, "Rolling-window CSV")->check(CLI::ExistingFile);
  rep->add_option("--metrics", rp_metrics, "Detection metrics CSV")->check(CLI::ExistingFile);
  rep->add_option("-o,--out", rp_out, "Markdown output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      Dataset ds;
      check(secflow_dataset_generate(gd_kind.c_str(), gd_rows, seed_or(gd_seed, 42), gd_bands ? 1 : 0, ds.out()));
      if (fs::path(gd_out).has_parent_path()) fs::create_directories(fs::path(gd_out).parent_path());
      const std::string meta = gd_meta.empty() ? gd_out + ".meta.csv" : gd_meta;
      check(secflow_dataset_save(ds.p, gd_out.c_str(), meta.c_str()));
      std::cout << "wrote " << secflow_dataset_size(ds.p) << " rows to " << gd_out << "\n";
    } else if (tdet->parsed()) {
      const std::uint64_t seed = seed_or(td_seed, 42);
      std::vector<std::pair<std::string, Dataset>> sets;
      if (td_data.empty()) {
        for (const char* kind : {"ntd", "clf"}) {
          sets.emplace_back(kind, Dataset{});
          check(secflow_dataset_generate(kind, td_rows, seed, 0, sets.back().second.out()));
        }
      } else {
        for (const auto& path : td_data) {
          sets.emplace_back(fs::path(path).stem().string(), Dataset{});
          check(secflow_dataset_load(path.c_str(), nullptr, sets.back().second.out()));
        }
      }
      std::string csv = metrics_header();
      json bundle{{"version", 1}};
      for (auto& [name, ds] : sets) {
        Dataset train, test;
        check(secflow_dataset_split(ds.p, td_fraction, seed, train.out(), test.out()));
        for (const char* kind : {"random_forest", "linear"}) {
          Detector model;
          check(secflow_detector_train(train.p, kind, seed, model.out()));
          CString metrics, doc;
          check(secflow_detector_evaluate(model.p, test.p, metrics.out()));
          check(secflow_detector_to_json(model.p, doc.out()));
          csv += metrics_row(name, kind, json::parse(metrics.str()));
          write_file(fs::path(td_out) / (name + "_" + kind + ".json"), doc.str() + "\n");
          const json model_doc = json::parse(doc.str());
          if (std::string(kind) == "random_forest") {
            const std::string schema = model_doc.value("schema", std::string());
            if (schema == "ntd" || schema == "clf") bundle[schema] = model_doc;
          }
        }
      }
      write_file(fs::path(td_out) / "metrics.csv", csv);
      write_file(fs::path(td_out) / "models.json", bundle.dump() + "\n");
      std::cout << csv;
    } else if (tsev->parsed()) {
      const std::uint64_t seed = seed_or(ts_seed, 42);
      std::vector<Dataset> sets;
      if (ts_data.empty()) {
        for (const char* kind : {"ntd", "clf"}) {
          sets.emplace_back();
          check(secflow_dataset_generate(kind, ts_rows, seed, 1, sets.back().out()));
        }
      } else {
        for (const auto& path : ts_data) {
          sets.emplace_back();
          const std::string meta = path + ".meta.csv";
          check(secflow_dataset_load(path.c_str(), fs::exists(meta) ? meta.c_str() : nullptr, sets.back().out()));
        }
      }
      json merged{{"entries", json::array()}};
      for (auto& ds : sets) {
        Severity model;
        check(secflow_severity_fit(ds.p, seed, model.out()));
        CString doc;
        check(secflow_severity_to_json(model.p, doc.out()));
        const json part = json::parse(doc.str());
        for (const auto& e : part.at("entries")) merged["entries"].push_back(e);
      }
      Severity check_model;
      check(secflow_severity_from_json(merged.dump().c_str(), check_model.out()));
      write_file(ts_out, merged.dump() + "\n");
      if (!ts_models.empty()) {
        json bundle = parse_json(read_file(ts_models), ts_models);
        bundle["severity"] = merged;
        Bundle validated;
        check(secflow_bundle_from_json(bundle.dump().c_str(), validated.out()));
        write_file(ts_models, bundle.dump() + "\n");
      }
      std::cout << "wrote " << merged["entries"].size() << " severity entries to " << ts_out << "\n";
    } else if (trl->parsed()) {
      const std::string doc = rl_args.document();
      Bundle bundle;
      rl_args.load_models(bundle, doc);
      CString table;
      check(secflow_train_rl(doc.c_str(), bundle.p, table.out()));
      const fs::path out = fs::path(rl_args.out) / "qtable.json";
      write_file(out, table.str() + "\n");
      std::cout << "wrote " << out.string() << "\n";
    } else if (sim->parsed()) {
      const std::string doc = sim_args.document();
      Bundle bundle;
      sim_args.load_models(bundle, doc);
      const std::string warm = sim_qtable.empty() ? std::string() : read_file(sim_qtable);
      CString agg, log, table;
      check(secflow_simulate(doc.c_str(), bundle.p, sim_qtable.empty() ? nullptr : warm.c_str(), agg.out(),
                             log.out(), table.out()));
      const fs::path dir(sim_args.out);
      write_file(dir / "aggregate.csv", agg.str());
      write_file(dir / "events.jsonl", log.str());
      if (table.p) write_file(dir / "qtable.json", table.str() + "\n");
      std::cout << "wrote results to " << dir.string() << "\n";
    } else if (cmp->parsed()) {
      const std::string doc = cmp_args.document();
      Bundle bundle;
      cmp_args.load_models(bundle, doc);
      CString agg, win;
      check(secflow_compare(doc.c_str(), bundle.p, agg.out(), win.out()));
      const fs::path dir(cmp_args.out);
      write_file(dir / "aggregate.csv", agg.str());
      write_file(dir / "windows.csv", win.str());
      std::cout << "wrote results to " << dir.string() << "\n";
    } else if (rep->parsed()) {
      if (rp_aggregate.empty() && rp_windows.empty() && rp_metrics.empty()) {
        std::cerr << "error: report needs at least one of --aggregate, --windows, --metrics\n";
        return 2;
      }
      const std::string a = rp_aggregate.empty() ? "" : read_file(rp_aggregate);
      const std::string w = rp_windows.empty() ? "" : read_file(rp_windows);
      const std::string m = rp_metrics.empty() ? "" : read_file(rp_metrics);
      CString md;
      check(secflow_report(rp_aggregate.empty() ? nullptr : a.c_str(), rp_windows.empty() ? nullptr : w.c_str(),
                           rp_metrics.empty() ? nullptr : m.c_str(), md.out()));
      write_file(rp_out, md.str());
      std::cout << "wrote " << rp_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
