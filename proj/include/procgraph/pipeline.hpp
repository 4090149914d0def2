#ifndef PROCGRAPH_PIPELINE_HPP
#define PROCGRAPH_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "procgraph/estimator.hpp"
#include "procgraph/ingest.hpp"

namespace procgraph {

inline constexpr std::string_view kDefaultBaseIri = "https://procurement.example.org/";

// Shared run settings, loadable from a JSON config file. Every field has a
// default so the config is optional; flags override it.
struct PipelineConfig {
  AliasMap aliases = default_aliases();       // config entries layered on top
  std::vector<std::string> drop_patterns;
  std::string mapping_path;                   // empty: built-in mapping
  std::string shapes_path;                    // empty: built-in shapes
  std::string base_iri = std::string(kDefaultBaseIri);
  std::size_t k = kDefaultK;
  std::uint64_t seed = kDefaultEmbedSeed;
};

PipelineConfig parse_pipeline_config(std::string_view doc);
PipelineConfig load_pipeline_config(const std::string& path);

}  // namespace procgraph

#endif  // PROCGRAPH_PIPELINE_HPP
