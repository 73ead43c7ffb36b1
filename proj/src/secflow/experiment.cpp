#include "secflow/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "secflow/errors.hpp"

namespace secflow {

Detectors ModelBundle::view() const {
  return Detectors{ntd ? &*ntd : nullptr, clf ? &*clf : nullptr, severity ? &*severity : nullptr};
}

Json bundle_to_json(const ModelBundle& bundle) {
  Json doc{{"version", kBundleVersion}};
  if (bundle.ntd) doc["ntd"] = bundle.ntd->to_json();
  if (bundle.clf) doc["clf"] = bundle.clf->to_json();
  if (bundle.severity) doc["severity"] = bundle.severity->to_json();
  return doc;
}

ModelBundle bundle_from_json(const Json& doc) {
  JsonCursor root(doc, "$");
  const double version = root.at("version").number();
  if (version != kBundleVersion) root.at("version").error("unsupported bundle version");
  ModelBundle bundle;
  if (root.has("ntd")) {
    bundle.ntd = DetectorModel::from_json(root.at("ntd").node());
    if (bundle.ntd->schema() != DatasetKind::NTD) root.at("ntd").error("detector was trained on another schema");
  }
  if (root.has("clf")) {
    bundle.clf = DetectorModel::from_json(root.at("clf").node());
    if (bundle.clf->schema() != DatasetKind::CLF) root.at("clf").error("detector was trained on another schema");
  }
  if (root.has("severity")) bundle.severity = SeverityModel::from_json(root.at("severity").node());
  return bundle;
}

ModelBundle train_default_bundle(const TrainingOptions& opts, std::uint64_t seed) {
  ModelBundle bundle;
  SeverityModel severity;
  for (DatasetKind kind : {DatasetKind::NTD, DatasetKind::CLF}) {
    const std::string name(to_string(kind));
    const Dataset ds = generate(kind, opts.records, default_attack_mix(), derive_seed(seed, "data." + name),
                                opts.telemetry);
    const auto [train, test] = split(ds, opts.train_fraction, derive_seed(seed, "split." + name));
    DetectorModel model = train_random_forest(train, opts.forest, derive_seed(seed, "forest." + name));
    (kind == DatasetKind::NTD ? bundle.ntd : bundle.clf) = std::move(model);
    const SeverityModel part = fit_severity_model(train, derive_seed(seed, "severity." + name), opts.kmeans);
    for (const auto& [key, entry] : part.entries()) severity.set(key.first, key.second, entry);
  }
  bundle.severity = std::move(severity);
  return bundle;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::size_t parse_count(const std::string& s, std::size_t line) {
  const double x = parse_number(s, line);
  if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x))) {
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": bad count '" + s + "'");
  }
  return static_cast<std::size_t>(x);
}

template <typename F>
auto parse_field(F&& f, std::size_t line) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": " + e.what());
  }
}

const char* const kAggregateHeader = "run,strategy,class,price,time,value,mitigation,injected,detected,adapted,failed";
const char* const kWindowHeader = "class,strategy,window,first_run,last_run,price,time,value,mitigation,reward";

std::vector<std::vector<std::string>> read_rows(std::istream& in, const char* header, std::size_t width) {
  std::string line;
  if (!std::getline(in, line) || line != header) fail(ErrorCode::Parse, "unexpected CSV header");
  std::vector<std::vector<std::string>> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != width) {
      fail(ErrorCode::Parse, "line " + std::to_string(n) + ": expected " + std::to_string(width) + " columns");
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

RewardAttributes attributes(const Totals& t) { return {t.price, t.time, t.value, t.mitigation}; }

}  // namespace

std::vector<AggregateRow> aggregate_rows(const ExperimentResult& result, Strategy strategy, WorkflowClass cls) {
  std::vector<AggregateRow> rows;
  rows.reserve(result.runs.size());
  for (const auto& r : result.runs) {
    rows.push_back(AggregateRow{r.instance, strategy, cls, r.totals, r.injected, r.detected, r.adapted, r.failed});
  }
  return rows;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
  out << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    out << r.run << ',' << to_string(r.strategy) << ',' << to_string(r.cls) << ',' << fmt(r.totals.price) << ','
        << fmt(r.totals.time) << ',' << fmt(r.totals.value) << ',' << fmt(r.totals.mitigation) << ',' << r.injected
        << ',' << r.detected << ',' << r.adapted << ',' << r.failed << '\n';
  }
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
  std::vector<AggregateRow> rows;
  std::size_t line = 1;
  for (const auto& c : read_rows(in, kAggregateHeader, 11)) {
    ++line;
    AggregateRow r;
    r.run = parse_count(c[0], line);
    r.strategy = parse_field([&] { return parse_strategy(c[1]); }, line);
    r.cls = parse_field([&] { return parse_workflow_class(c[2]); }, line);
    r.totals = {parse_number(c[3], line), parse_number(c[4], line), parse_number(c[5], line),
                parse_number(c[6], line)};
    r.injected = parse_count(c[7], line);
    r.detected = parse_count(c[8], line);
    r.adapted = parse_count(c[9], line);
    r.failed = parse_count(c[10], line);
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> composite_rewards(const std::vector<AggregateRow>& rows, const RewardWeights& weights) {
  weights.validate();
  std::map<WorkflowClass, std::pair<RewardAttributes, RewardAttributes>> range;
  for (const auto& r : rows) {
    const RewardAttributes x = attributes(r.totals);
    auto [it, fresh] = range.try_emplace(r.cls, x, x);
    if (fresh) continue;
    auto& [lo, hi] = it->second;
    lo = {std::min(lo.price, x.price), std::min(lo.time, x.time), std::min(lo.value, x.value),
          std::min(lo.mitigation, x.mitigation)};
    hi = {std::max(hi.price, x.price), std::max(hi.time, x.time), std::max(hi.value, x.value),
          std::max(hi.mitigation, x.mitigation)};
  }
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const auto& [lo, hi] = range.at(r.cls);
    out.push_back(reward(attributes(r.totals), lo, hi, weights));
  }
  return out;
}

std::vector<WindowRow> window_rows(const std::vector<AggregateRow>& rows, std::size_t window,
                                   const RewardWeights& weights) {
  if (window == 0) fail(ErrorCode::Config, "window must be positive");
  const std::vector<double> rewards = composite_rewards(rows, weights);
  // Group by (class, strategy) in first-appearance order, keeping run order within.
  std::vector<std::pair<WorkflowClass, Strategy>> keys;
  std::map<std::pair<WorkflowClass, Strategy>, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto key = std::make_pair(rows[k].cls, rows[k].strategy);
    auto& g = groups[key];
    if (g.empty()) keys.push_back(key);
    g.push_back(k);
  }
  std::vector<WindowRow> out;
  for (const auto& key : keys) {
    auto idx = groups.at(key);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rows[a].run < rows[b].run; });
    for (std::size_t start = 0, w = 1; start < idx.size(); start += window, ++w) {
      const std::size_t end = std::min(idx.size(), start + window);
      WindowRow row;
      row.cls = key.first;
      row.strategy = key.second;
      row.window = w;
      row.first_run = rows[idx[start]].run;
      row.last_run = rows[idx[end - 1]].run;
      const double n = static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const Totals& t = rows[idx[k]].totals;
        row.mean.price += t.price / n;
        row.mean.time += t.time / n;
        row.mean.value += t.value / n;
        row.mean.mitigation += t.mitigation / n;
        row.reward += rewards[idx[k]] / n;
      }
      out.push_back(row);
    }
  }
  return out;
}

void write_window_csv(const std::vector<WindowRow>& rows, std::ostream& out) {
  out << kWindowHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.cls) << ',' << to_string(r.strategy) << ',' << r.window << ',' << r.first_run << ','
        << r.last_run << ',' << fmt(r.mean.price) << ',' << fmt(r.mean.time) << ',' << fmt(r.mean.value) << ','
        << fmt(r.mean.mitigation) << ',' << fmt(r.reward) << '\n';
  }
}

std::vector<WindowRow> read_window_csv(std::istream& in) {
  std::vector<WindowRow> rows;
  std::size_t line = 1;
  for (const auto& c : read_rows(in, kWindowHeader, 10)) {
    ++line;
    WindowRow r;
    r.cls = parse_field([&] { return parse_workflow_class(c[0]); }, line);
    r.strategy = parse_field([&] { return parse_strategy(c[1]); }, line);
    r.window = parse_count(c[2], line);
    r.first_run = parse_count(c[3], line);
    r.last_run = parse_count(c[4], line);
    r.mean = {parse_number(c[5], line), parse_number(c[6], line), parse_number(c[7], line), parse_number(c[8], line)};
    r.reward = parse_number(c[9], line);
    rows.push_back(r);
  }
  return rows;
}

void write_event_log(const ExperimentResult& result, Strategy strategy, WorkflowClass cls, std::ostream& out) {
  const std::string s(to_string(strategy));
  const std::string c(to_string(cls));
  for (const auto& r : result.runs) {
    for (const auto& a : r.audits) {
      Json line = audit_to_json(a);
      line["event"] = "adaptation";
      line["strategy"] = s;
      line["class"] = c;
      out << line.dump() << '\n';
    }
    Json summary{{"event", "run"},
                 {"instance", r.instance},
                 {"strategy", s},
                 {"class", c},
                 {"price", r.totals.price},
                 {"time", r.totals.time},
                 {"value", r.totals.value},
                 {"mitigation", r.totals.mitigation},
                 {"injected", r.injected},
                 {"detected", r.detected},
                 {"false_alarms", r.false_alarms},
                 {"adapted", r.adapted},
                 {"unmitigated", r.unmitigated},
                 {"failed", r.failed}};
    out << summary.dump() << '\n';
  }
}

std::string render_report(const std::vector<AggregateRow>& aggregate, const std::vector<WindowRow>& windows,
                          const std::vector<std::vector<std::string>>* metrics) {
  std::ostringstream md;
  md << "# Experiment report\n\n";
  if (metrics && !metrics->empty()) {
    md << "## Detection\n\n";
    const auto& header = metrics->front();
    md << '|';
    for (const auto& h : header) md << ' ' << h << " |";
    md << "\n|";
    for (std::size_t k = 0; k < header.size(); ++k) md << "---|";
    md << '\n';
    for (std::size_t r = 1; r < metrics->size(); ++r) {
      md << '|';
      for (const auto& cell : (*metrics)[r]) md << ' ' << cell << " |";
      md << '\n';
    }
    md << '\n';
  }

  if (!aggregate.empty()) {
    struct Acc {
      std::size_t n = 0;
      Totals sum;
      std::size_t injected = 0, detected = 0, adapted = 0, failed = 0;
    };
    std::vector<std::pair<WorkflowClass, Strategy>> order;
    std::map<std::pair<WorkflowClass, Strategy>, Acc> acc;
    for (const auto& r : aggregate) {
      const auto key = std::make_pair(r.cls, r.strategy);
      Acc& a = acc[key];
      if (a.n++ == 0) order.push_back(key);
      a.sum.price += r.totals.price;
      a.sum.time += r.totals.time;
      a.sum.value += r.totals.value;
      a.sum.mitigation += r.totals.mitigation;
      a.injected += r.injected;
      a.detected += r.detected;
      a.adapted += r.adapted;
      a.failed += r.failed;
    }
    md << "## Mean per run\n\n";
    md << "| class | strategy | runs | price | time | value | mitigation | injected | detected | adapted | failed |\n";
    md << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    char buf[256];
    for (const auto& key : order) {
      const Acc& a = acc.at(key);
      const double n = static_cast<double>(a.n);
      std::snprintf(buf, sizeof buf, "| %s | %s | %zu | %.4f | %.4f | %.4f | %.4f | %.3f | %.3f | %.3f | %.3f |\n",
                    std::string(to_string(key.first)).c_str(), std::string(to_string(key.second)).c_str(), a.n,
                    a.sum.price / n, a.sum.time / n, a.sum.value / n, a.sum.mitigation / n, a.injected / n,
                    a.detected / n, a.adapted / n, a.failed / n);
      md << buf;
    }
    md << '\n';
  }

  if (!windows.empty()) {
    md << "## Rolling windows\n\n";
    md << "| class | strategy | window | runs | price | time | value | mitigation | reward |\n";
    md << "|---|---|---|---|---|---|---|---|---|\n";
    char buf[256];
    for (const auto& w : windows) {
      std::snprintf(buf, sizeof buf, "| %s | %s | %zu | %zu-%zu | %.4f | %.4f | %.4f | %.4f | %.4f |\n",
                    std::string(to_string(w.cls)).c_str(), std::string(to_string(w.strategy)).c_str(), w.window,
                    w.first_run, w.last_run, w.mean.price, w.mean.time, w.mean.value, w.mean.mitigation, w.reward);
      md << buf;
    }
    md << '\n';
  }
  return md.str();
}

// ---------------------------------------------------------------------------
// Comparison sweep
// ---------------------------------------------------------------------------

Scenario make_scenario(WorkflowClass cls, std::uint64_t seed) {
  Scenario s;
  s.cls = cls;
  s.cloud = generate_multicloud(derive_seed(seed, "cloud"));
  s.workflow = generate_workflow_class(cls, derive_seed(seed, "workflow." + std::string(to_string(cls))), &s.cloud);
  s.trust = TrustRepository::from_cloud(s.cloud);
  return s;
}

ComparisonResult compare_scenario(const Scenario& scenario, const Detectors& detectors, const ExperimentConfig& cfg) {
  ComparisonResult out;
  for (Strategy strategy : {Strategy::LowestCost, Strategy::Adaptive}) {
    ExperimentConfig run_cfg = cfg;
    run_cfg.settings.tenant.strategy = strategy;
    ExperimentResult res = run_experiment(scenario.workflow, scenario.cloud, detectors, run_cfg, scenario.trust);
    auto rows = aggregate_rows(res, strategy, scenario.cls);
    out.aggregate.insert(out.aggregate.end(), rows.begin(), rows.end());
    if (res.qtable) out.qtables.push_back(std::move(*res.qtable));
  }
  out.windows = window_rows(out.aggregate, cfg.window, cfg.reward);
  return out;
}

ComparisonResult run_comparison(const std::vector<WorkflowClass>& classes, const Detectors& detectors,
                                const ExperimentConfig& cfg, std::uint64_t scenario_seed) {
  if (classes.empty()) fail(ErrorCode::Config, "no workflow classes to compare");
  ComparisonResult out;
  for (WorkflowClass cls : classes) {
    ComparisonResult part = compare_scenario(make_scenario(cls, scenario_seed), detectors, cfg);
    out.aggregate.insert(out.aggregate.end(), part.aggregate.begin(), part.aggregate.end());
    for (auto& q : part.qtables) out.qtables.push_back(std::move(q));
  }
  out.windows = window_rows(out.aggregate, cfg.window, cfg.reward);
  return out;
}

// ---------------------------------------------------------------------------
// Settings documents
// ---------------------------------------------------------------------------

namespace {

void reject_unknown(const Json& doc, std::initializer_list<std::string_view> known, const std::string& where) {
  if (!doc.is_object()) fail(ErrorCode::Config, where + " must be an object");
  for (const auto& item : doc.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      fail(ErrorCode::Config, "unknown setting '" + where + "." + item.key() + "'");
    }
  }
}

std::size_t count_or(const JsonCursor& cur, std::string_view key, std::size_t fallback) {
  if (!cur.has(key)) return fallback;
  const double x = cur.at(key).number();
  if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x))) cur.at(key).error("must be a non-negative integer");
  return static_cast<std::size_t>(x);
}

bool bool_or(const JsonCursor& cur, std::string_view key, bool fallback) {
  if (!cur.has(key)) return fallback;
  const Json& v = cur.at(key).node();
  if (!v.is_boolean()) cur.at(key).error("must be true or false");
  return v.get<bool>();
}

std::uint64_t seed_or(const JsonCursor& cur, std::string_view key, std::uint64_t fallback) {
  if (!cur.has(key)) return fallback;
  const Json& v = cur.at(key).node();
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    cur.at(key).error("must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

// Config errors keep their code; everything else from nested parsers becomes Config.
template <typename F>
auto as_config(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    fail(ErrorCode::Config, e.what());
  }
}

}  // namespace

Json uncertainty_to_json(const UncertaintyConfig& cfg) {
  return Json{{"rework_late_multiplier", cfg.rework_late_multiplier},
              {"late_ratio", cfg.late_ratio},
              {"skip_failure_delta", cfg.skip_failure_delta},
              {"overhead_sigma", cfg.overhead_sigma},
              {"reconfig_afr_factor", cfg.reconfig_afr_factor}};
}

UncertaintyConfig uncertainty_from_json(const Json& doc) {
  reject_unknown(doc,
                 {"rework_late_multiplier", "late_ratio", "skip_failure_delta", "overhead_sigma", "reconfig_afr_factor"},
                 "uncertainty");
  JsonCursor cur(doc, "$.uncertainty");
  UncertaintyConfig cfg;
  cfg.rework_late_multiplier = cur.number_or("rework_late_multiplier", cfg.rework_late_multiplier);
  cfg.late_ratio = cur.number_or("late_ratio", cfg.late_ratio);
  cfg.skip_failure_delta = cur.number_or("skip_failure_delta", cfg.skip_failure_delta);
  cfg.overhead_sigma = cur.number_or("overhead_sigma", cfg.overhead_sigma);
  cfg.reconfig_afr_factor = cur.number_or("reconfig_afr_factor", cfg.reconfig_afr_factor);
  cfg.validate();
  return cfg;
}

Json reward_weights_to_json(const RewardWeights& w) {
  return Json{{"price", w.price}, {"time", w.time}, {"value", w.value}, {"mitigation", w.mitigation}};
}

RewardWeights reward_weights_from_json(const Json& doc) {
  reject_unknown(doc, {"price", "time", "value", "mitigation"}, "reward");
  JsonCursor cur(doc, "$.reward");
  RewardWeights w;
  w.price = cur.number_or("price", w.price);
  w.time = cur.number_or("time", w.time);
  w.value = cur.number_or("value", w.value);
  w.mitigation = cur.number_or("mitigation", w.mitigation);
  w.validate();
  return w;
}

RunSpec run_spec_from_json(const Json& doc) {
  reject_unknown(doc,
                 {"seed", "scenario_seed", "runs", "window", "attack_rate", "detection", "persist_trust", "warmup_runs",
                  "calibration_runs", "keep_logs", "trust_beta", "strategy", "classes", "tenant", "uncertainty", "rl",
                  "reward", "telemetry", "workflow", "cloud", "trust"},
                 "$");
  return as_config([&] {
    JsonCursor root(doc, "$");
    RunSpec spec;
    ExperimentConfig& e = spec.experiment;
    e.seed = seed_or(root, "seed", e.seed);
    spec.scenario_seed = seed_or(root, "scenario_seed", e.seed);
    e.n_runs = count_or(root, "runs", e.n_runs);
    e.window = count_or(root, "window", e.window);
    e.warmup_runs = count_or(root, "warmup_runs", e.warmup_runs);
    e.calibration_runs = count_or(root, "calibration_runs", e.calibration_runs);
    e.persist_trust = bool_or(root, "persist_trust", e.persist_trust);
    e.keep_logs = bool_or(root, "keep_logs", e.keep_logs);
    if (root.has("tenant")) e.settings.tenant = tenant_config_from_json(root.at("tenant").node());
    if (root.has("strategy")) e.settings.tenant.strategy = parse_strategy(root.at("strategy").string());
    e.settings.attack_rate = root.number_or("attack_rate", e.settings.attack_rate);
    e.settings.trust_beta = root.number_or("trust_beta", e.settings.trust_beta);
    if (root.has("detection")) e.settings.mode = parse_detection_mode(root.at("detection").string());
    if (root.has("uncertainty")) e.settings.uncertainty = uncertainty_from_json(root.at("uncertainty").node());
    if (root.has("telemetry")) {
      const Json& t = root.at("telemetry").node();
      reject_unknown(t, {"separation", "three_bands", "band_half_width"}, "telemetry");
      JsonCursor tc(t, "$.telemetry");
      e.settings.telemetry.separation = tc.number_or("separation", e.settings.telemetry.separation);
      e.settings.telemetry.three_bands = bool_or(tc, "three_bands", e.settings.telemetry.three_bands);
      e.settings.telemetry.band_half_width = tc.number_or("band_half_width", e.settings.telemetry.band_half_width);
    }
    if (root.has("rl")) e.rl = rl_config_from_json(root.at("rl").node());
    if (root.has("reward")) e.reward = reward_weights_from_json(root.at("reward").node());
    if (root.has("classes")) {
      JsonCursor cls = root.at("classes");
      spec.classes.clear();
      for (std::size_t k = 0; k < cls.array_size(); ++k) spec.classes.push_back(parse_workflow_class(cls.at(k).string()));
      if (spec.classes.empty()) cls.error("needs at least one class");
    }
    if (root.has("cloud")) spec.cloud = multicloud_from_json(root.at("cloud").node());
    if (root.has("workflow")) spec.workflow = workflow_from_json(root.at("workflow").node());
    if (root.has("trust")) spec.trust = TrustRepository::from_json(root.at("trust").node());
    if (e.n_runs == 0) root.at("runs").error("must be at least 1");
    if (e.window == 0) root.at("window").error("must be at least 1");
    e.settings.validate();
    e.rl.validate();
    return spec;
  });
}

Json run_spec_to_json(const RunSpec& spec) {
  const ExperimentConfig& e = spec.experiment;
  Json classes = Json::array();
  for (WorkflowClass c : spec.classes) classes.push_back(std::string(to_string(c)));
  Json doc{{"seed", e.seed},
           {"scenario_seed", spec.scenario_seed},
           {"runs", e.n_runs},
           {"window", e.window},
           {"attack_rate", e.settings.attack_rate},
           {"detection", std::string(to_string(e.settings.mode))},
           {"persist_trust", e.persist_trust},
           {"warmup_runs", e.warmup_runs},
           {"calibration_runs", e.calibration_runs},
           {"keep_logs", e.keep_logs},
           {"trust_beta", e.settings.trust_beta},
           {"classes", std::move(classes)},
           {"tenant", tenant_config_to_json(e.settings.tenant)},
           {"uncertainty", uncertainty_to_json(e.settings.uncertainty)},
           {"rl", rl_config_to_json(e.rl)},
           {"reward", reward_weights_to_json(e.reward)},
           {"telemetry", Json{{"separation", e.settings.telemetry.separation},
                              {"three_bands", e.settings.telemetry.three_bands},
                              {"band_half_width", e.settings.telemetry.band_half_width}}}};
  if (spec.workflow) doc["workflow"] = workflow_to_json(*spec.workflow);
  if (spec.cloud) doc["cloud"] = multicloud_to_json(*spec.cloud);
  if (spec.trust) doc["trust"] = spec.trust->to_json();
  return doc;
}

Scenario resolve_scenario(const RunSpec& spec, WorkflowClass cls) {
  Scenario s = make_scenario(cls, spec.scenario_seed);
  if (spec.cloud) {
    s.cloud = *spec.cloud;
    if (!spec.workflow) {
      s.workflow = generate_workflow_class(
          cls, derive_seed(spec.scenario_seed, "workflow." + std::string(to_string(cls))), &s.cloud);
    }
    s.trust = TrustRepository::from_cloud(s.cloud);
  }
  if (spec.workflow) s.workflow = *spec.workflow;
  if (spec.trust) {
    spec.trust->check_against(s.cloud);
    s.trust = *spec.trust;
  }
  return s;
}

}  // namespace secflow
