#include "procgraph/pipeline.hpp"

#include "procgraph/errors.hpp"
#include "procgraph/rdf.hpp"
#include "procgraph/text.hpp"

#include "json.hpp"

namespace procgraph {
namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto a : allowed) {
      if (it.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) fail(Errc::config, "unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view doc) {
  json root;
  try {
    root = json::parse(doc);
  } catch (const json::exception& e) {
    fail(Errc::config, std::string("malformed config: ") + e.what());
  }
  if (!root.is_object()) fail(Errc::config, "config must be a JSON object");
  reject_unknown(root, {"aliases", "drop_patterns", "mapping", "shapes", "base_iri", "k", "seed"},
                 "config");

  PipelineConfig config;
  if (root.contains("aliases")) {
    if (!root["aliases"].is_object()) fail(Errc::config, "aliases must be an object");
    for (auto it = root["aliases"].begin(); it != root["aliases"].end(); ++it) {
      if (!it.value().is_string()) {
        fail(Errc::config, "alias '" + it.key() + "' must map to a string");
      }
      std::string canonical = it.value().get<std::string>();
      bool ok = false;
      for (const auto& c : kCanonicalColumns) ok = ok || c == canonical;
      if (!ok) {
        fail(Errc::config, "alias '" + it.key() + "' targets unknown column '" + canonical + "'");
      }
      config.aliases[to_lower_ascii(trim(it.key()))] = canonical;
    }
  }
  if (root.contains("drop_patterns")) {
    if (!root["drop_patterns"].is_array()) fail(Errc::config, "drop_patterns must be an array");
    for (const json& p : root["drop_patterns"]) {
      if (!p.is_string()) fail(Errc::config, "drop_patterns entries must be strings");
      config.drop_patterns.push_back(p.get<std::string>());
    }
  }
  if (root.contains("mapping")) {
    if (!root["mapping"].is_string()) fail(Errc::config, "mapping must be a file path");
    config.mapping_path = root["mapping"].get<std::string>();
  }
  if (root.contains("shapes")) {
    if (!root["shapes"].is_string()) fail(Errc::config, "shapes must be a file path");
    config.shapes_path = root["shapes"].get<std::string>();
  }
  if (root.contains("base_iri")) {
    if (!root["base_iri"].is_string()) fail(Errc::config, "base_iri must be a string");
    config.base_iri = root["base_iri"].get<std::string>();
    if (!is_valid_iri(config.base_iri) || config.base_iri.back() != '/') {
      fail(Errc::config, "base_iri must be an absolute IRI ending with '/'");
    }
  }
  if (root.contains("k")) {
    if (!root["k"].is_number_unsigned() || root["k"].get<std::uint64_t>() < 1) {
      fail(Errc::config, "k must be a positive integer");
    }
    config.k = root["k"].get<std::size_t>();
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) fail(Errc::config, "seed must be a non-negative integer");
    config.seed = root["seed"].get<std::uint64_t>();
  }
  return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  return parse_pipeline_config(read_file(path));
}

}  // namespace procgraph
