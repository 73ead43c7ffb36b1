#include "secflow/serialize.hpp"

#include <fstream>
#include <sstream>

#include "secflow/errors.hpp"

namespace secflow {

Json parse_json_text(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::Parse, std::string("malformed JSON: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json_file(const std::filesystem::path& path) {
  try {
    return parse_json_text(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) fail(ErrorCode::Parse, path.string() + ": " + e.what());
    throw;
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::Io, "short write to '" + path.string() + "'");
}

// ---------------------------------------------------------------------------

bool JsonCursor::has(std::string_view key) const {
  return node_->is_object() && node_->contains(key);
}

JsonCursor JsonCursor::at(std::string_view key) const {
  if (!node_->is_object()) error("expected an object");
  auto it = node_->find(key);
  if (it == node_->end()) fail(ErrorCode::Parse, path_ + "." + std::string(key) + ": missing field");
  return JsonCursor(*it, path_ + "." + std::string(key));
}

JsonCursor JsonCursor::at(std::size_t index) const {
  if (!node_->is_array()) error("expected an array");
  if (index >= node_->size()) error("index " + std::to_string(index) + " out of range");
  return JsonCursor((*node_)[index], path_ + "[" + std::to_string(index) + "]");
}

std::size_t JsonCursor::array_size() const {
  if (!node_->is_array()) error("expected an array");
  return node_->size();
}

double JsonCursor::number() const {
  if (!node_->is_number()) error("expected a number");
  return node_->get<double>();
}

double JsonCursor::number_or(std::string_view key, double fallback) const {
  return has(key) ? at(key).number() : fallback;
}

std::string JsonCursor::string() const {
  if (!node_->is_string()) error("expected a string");
  return node_->get<std::string>();
}

std::string JsonCursor::string_or(std::string_view key, std::string fallback) const {
  return has(key) ? at(key).string() : fallback;
}

void JsonCursor::error(const std::string& what) const { fail(ErrorCode::Parse, path_ + ": " + what); }

// ---------------------------------------------------------------------------

namespace {

SecurityVector vector_from(const JsonCursor& cur) {
  if (cur.array_size() != 3) cur.error("expected [c, i, a]");
  return {cur.at(std::size_t{0}).number(), cur.at(std::size_t{1}).number(), cur.at(std::size_t{2}).number()};
}

Json vector_to(const SecurityVector& v) { return Json::array({v.c, v.i, v.a}); }

OverheadFractions overheads_from(const JsonCursor& cur) {
  OverheadFractions o;
  o.new_task_time = cur.number_or("new_task_time", o.new_task_time);
  o.new_task_price = cur.number_or("new_task_price", o.new_task_price);
  o.new_task_value = cur.number_or("new_task_value", o.new_task_value);
  o.switch_time = cur.number_or("switch_time", o.switch_time);
  o.switch_value = cur.number_or("switch_value", o.switch_value);
  o.reconfig_time = cur.number_or("reconfig_time", o.reconfig_time);
  o.reconfig_price = cur.number_or("reconfig_price", o.reconfig_price);
  o.reconfig_value = cur.number_or("reconfig_value", o.reconfig_value);
  o.redundancy_value = cur.number_or("redundancy_value", o.redundancy_value);
  return o;
}

Json overheads_to(const OverheadFractions& o) {
  return Json{{"new_task_time", o.new_task_time},   {"new_task_price", o.new_task_price},
              {"new_task_value", o.new_task_value}, {"switch_time", o.switch_time},
              {"switch_value", o.switch_value},     {"reconfig_time", o.reconfig_time},
              {"reconfig_price", o.reconfig_price}, {"reconfig_value", o.reconfig_value},
              {"redundancy_value", o.redundancy_value}};
}

}  // namespace

Workflow workflow_from_json(const Json& doc) {
  JsonCursor root(doc, "$");
  std::vector<Task> tasks;
  JsonCursor jt = root.at("tasks");
  for (std::size_t k = 0; k < jt.array_size(); ++k) {
    JsonCursor t = jt.at(k);
    Task task;
    task.id = t.at("id").string();
    task.requirements = {t.at("c").number(), t.at("i").number(), t.at("a").number()};
    task.value = t.at("value").number();
    if (t.has("actions")) {
      JsonCursor ja = t.at("actions");
      for (std::size_t m = 0; m < ja.array_size(); ++m) {
        JsonCursor a = ja.at(m);
        FeasibleAction fa;
        try {
          fa.kind = parse_action_kind(a.at("kind").string());
        } catch (const Error& e) {
          fail(ErrorCode::Validation, a.path() + ".kind: " + e.what());
        }
        const bool has_params = a.has("price") || a.has("time") || a.has("mi") || a.has("value");
        if (has_params) {
          ActionParams p;
          p.price = a.at("price").number();
          p.time = a.at("time").number();
          p.mitigation_impact = vector_from(a.at("mi"));
          p.value = a.at("value").number();
          fa.params = p;
        }
        task.actions.push_back(fa);
      }
    }
    tasks.push_back(std::move(task));
  }

  std::vector<ControlEdge> control;
  if (root.has("control_edges")) {
    JsonCursor je = root.at("control_edges");
    for (std::size_t k = 0; k < je.array_size(); ++k) {
      JsonCursor e = je.at(k);
      control.push_back({e.at("from").string(), e.at("to").string(), e.string_or("cond", ""),
                         e.number_or("prob", 0.5)});
    }
  }
  std::vector<DataEdge> data;
  if (root.has("data_edges")) {
    JsonCursor je = root.at("data_edges");
    for (std::size_t k = 0; k < je.array_size(); ++k) {
      JsonCursor e = je.at(k);
      data.push_back({e.at("from").string(), e.at("to").string(), e.string_or("data", "")});
    }
  }
  OverheadFractions overheads;
  if (root.has("overheads")) overheads = overheads_from(root.at("overheads"));
  return Workflow(std::move(tasks), std::move(control), std::move(data), overheads);
}

Json workflow_to_json(const Workflow& wf) {
  Json tasks = Json::array();
  for (const auto& t : wf.tasks()) {
    Json actions = Json::array();
    for (const auto& fa : t.actions) {
      Json a{{"kind", std::string(to_string(fa.kind))}};
      if (fa.params) {
        a["price"] = fa.params->price;
        a["time"] = fa.params->time;
        a["mi"] = vector_to(fa.params->mitigation_impact);
        a["value"] = fa.params->value;
      }
      actions.push_back(std::move(a));
    }
    tasks.push_back(Json{{"id", t.id},
                         {"c", t.requirements.c},
                         {"i", t.requirements.i},
                         {"a", t.requirements.a},
                         {"value", t.value},
                         {"actions", std::move(actions)}});
  }
  Json control = Json::array();
  for (const auto& e : wf.control_edges()) {
    control.push_back(Json{{"from", e.from}, {"to", e.to}, {"cond", e.cond}, {"prob", e.prob}});
  }
  Json data = Json::array();
  for (const auto& e : wf.data_edges()) data.push_back(Json{{"from", e.from}, {"to", e.to}, {"data", e.data}});
  return Json{{"tasks", std::move(tasks)},
              {"control_edges", std::move(control)},
              {"data_edges", std::move(data)},
              {"overheads", overheads_to(wf.overheads())}};
}

Workflow parse_workflow(std::string_view document) { return workflow_from_json(parse_json_text(document)); }

// ---------------------------------------------------------------------------

MultiCloud multicloud_from_json(const Json& doc) {
  JsonCursor root(doc, "$");
  std::vector<Provider> providers;
  JsonCursor jp = root.at("providers");
  for (std::size_t k = 0; k < jp.array_size(); ++k) {
    JsonCursor p = jp.at(k);
    Provider provider;
    provider.id = p.at("id").string();
    JsonCursor js = p.at("services");
    for (std::size_t m = 0; m < js.array_size(); ++m) {
      JsonCursor s = js.at(m);
      Service svc;
      svc.id = s.at("id").string();
      svc.provider_id = provider.id;
      svc.price = s.at("price").number();
      svc.response_time = s.at("time").number();
      svc.guarantees = {s.at("c").number(), s.at("i").number(), s.at("a").number()};
      if (s.has("afr")) {
        JsonCursor afr = s.at("afr");
        for (AttackType t : kAllAttackTypes) svc.afr[index_of(t)] = afr.number_or(to_string(t), 0.0);
      }
      provider.services.push_back(std::move(svc));
    }
    providers.push_back(std::move(provider));
  }
  return MultiCloud(std::move(providers));
}

Json multicloud_to_json(const MultiCloud& cloud) {
  Json providers = Json::array();
  for (const auto& p : cloud.providers()) {
    Json services = Json::array();
    for (const auto& s : p.services) {
      Json afr = Json::object();
      for (AttackType t : kAllAttackTypes) afr[std::string(to_string(t))] = s.afr_for(t);
      services.push_back(Json{{"id", s.id},
                              {"price", s.price},
                              {"time", s.response_time},
                              {"c", s.guarantees.c},
                              {"i", s.guarantees.i},
                              {"a", s.guarantees.a},
                              {"afr", std::move(afr)}});
    }
    providers.push_back(Json{{"id", p.id}, {"services", std::move(services)}});
  }
  return Json{{"providers", std::move(providers)}};
}

SchedulingPlan plan_from_json(const Json& doc) {
  JsonCursor root(doc, "$");
  JsonCursor b = root.at("bindings");
  if (!b.node().is_object()) b.error("expected an object");
  SchedulingPlan plan;
  for (const auto& [task, service] : b.node().items()) {
    plan.bindings[task] = b.at(task).string();
  }
  return plan;
}

Json plan_to_json(const SchedulingPlan& plan) { return Json{{"bindings", plan.bindings}}; }

TenantConfig tenant_config_from_json(const Json& doc) {
  JsonCursor root(doc, "$");
  TenantConfig cfg;
  if (root.has("weights")) {
    JsonCursor w = root.at("weights");
    cfg.weights.price = w.number_or("price", cfg.weights.price);
    cfg.weights.time = w.number_or("time", cfg.weights.time);
    cfg.weights.security = w.number_or("security", cfg.weights.security);
    cfg.weights.value = w.number_or("value", cfg.weights.value);
  }
  cfg.adapt_trigger_threshold = root.number_or("adapt_trigger_threshold", cfg.adapt_trigger_threshold);
  if (root.has("strategy")) cfg.strategy = parse_strategy(root.at("strategy").string());
  cfg.validate();
  return cfg;
}

Json tenant_config_to_json(const TenantConfig& cfg) {
  return Json{{"weights",
               {{"price", cfg.weights.price},
                {"time", cfg.weights.time},
                {"security", cfg.weights.security},
                {"value", cfg.weights.value}}},
              {"adapt_trigger_threshold", cfg.adapt_trigger_threshold},
              {"strategy", std::string(to_string(cfg.strategy))}};
}

}  // namespace secflow
