#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "secflow/model.hpp"

namespace secflow {

using Json = nlohmann::json;

/// Parses text as JSON; malformed input raises Parse.
Json parse_json_text(std::string_view text);
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

/// Field access that reports the offending JSON path on failure.
class JsonCursor {
 public:
  JsonCursor(const Json& node, std::string path) : node_(&node), path_(std::move(path)) {}

  const Json& node() const { return *node_; }
  const std::string& path() const { return path_; }

  bool has(std::string_view key) const;
  JsonCursor at(std::string_view key) const;
  JsonCursor at(std::size_t index) const;
  std::size_t array_size() const;

  double number() const;
  double number_or(std::string_view key, double fallback) const;
  std::string string() const;
  std::string string_or(std::string_view key, std::string fallback) const;

  [[noreturn]] void error(const std::string& what) const;

 private:
  const Json* node_;
  std::string path_;
};

Workflow workflow_from_json(const Json& doc);
Json workflow_to_json(const Workflow& workflow);
/// Text entry point: parse + validate.
Workflow parse_workflow(std::string_view document);

MultiCloud multicloud_from_json(const Json& doc);
Json multicloud_to_json(const MultiCloud& cloud);

SchedulingPlan plan_from_json(const Json& doc);
Json plan_to_json(const SchedulingPlan& plan);

TenantConfig tenant_config_from_json(const Json& doc);
Json tenant_config_to_json(const TenantConfig& cfg);

}  // namespace secflow
