#ifndef PROCGRAPH_MAPPING_HPP
#define PROCGRAPH_MAPPING_HPP

#include <string>
#include <string_view>
#include <vector>

#include "procgraph/ingest.hpp"
#include "procgraph/rdf.hpp"

namespace procgraph {

// Domain vocabulary, derived from the base IRI. Classes and the five
// contract properties live under the base; type/label are the standard ones.
struct Vocabulary {
  std::string base_iri;
  std::string contract_class;
  std::string institution_class;
  std::string supplier_class;
  std::string has_institution;
  std::string has_supplier;
  std::string has_amount;
  std::string has_date;
  std::string has_description;
  std::string type = std::string(kRdfType);
  std::string label = std::string(kRdfsLabel);

  static Vocabulary for_base(std::string_view base_iri);
};

enum class EntityKind { contract, institution, supplier };
std::string_view entity_kind_name(EntityKind kind);

// What a property rule emits as its object.
enum class ObjectSpec {
  institution_ref,  // minted institution IRI (from the cell text)
  supplier_ref,     // minted supplier IRI
  literal_string,
  literal_integer,
  literal_decimal,  // parsed through parse_amount
  literal_date,     // parsed through parse_date
};

struct ClassRule {
  std::string segment;    // IRI path segment, e.g. "contract"
  std::string class_iri;  // ontology class
};

struct PropertyRule {
  std::string column;
  std::string predicate;
  ObjectSpec object;
};

struct MappingSpec {
  std::string base_iri;  // absolute, ends with '/'
  ClassRule contract;
  ClassRule institution;
  ClassRule supplier;
  std::vector<PropertyRule> properties;

  Vocabulary vocabulary() const;
};

// Loads the JSON mapping document (docs/mapping.md). Unknown keys reject.
MappingSpec parse_mapping(std::string_view doc);
// The rule set the sample configs describe, derived from a base IRI.
MappingSpec default_mapping(std::string_view base_iri);

// base + kind segment + "/" + slug(label). Throws Errc::empty_slug when the
// label has no sluggable characters.
std::string mint_iri(std::string_view base, const std::string& segment, std::string_view label);

struct MappingDiagnostic {
  std::size_t row = 0;  // 0-based row index in the table
  std::string record_id;
  std::string message;
};

struct MappingResult {
  Graph graph;
  std::vector<MappingDiagnostic> diagnostics;  // per-row issues, row order
};

enum class FlaggedRows { reject, include };

// Turns a normalized table into the contract graph: per row one typed
// contract with its five properties, plus type+label for each distinct
// institution and supplier. With FlaggedRows::include, cells that fail to
// parse are emitted with their raw lexical form (so the shapes stage stays
// the single arbiter of rejection) and reported as diagnostics; empty
// entity cells drop just that link triple.
MappingResult execute_mapping(const RecordTable& table, const MappingSpec& spec,
                              FlaggedRows policy = FlaggedRows::reject);

// Serial reference for the row-parallel kernel above; same contract.
MappingResult execute_mapping_serial(const RecordTable& table, const MappingSpec& spec,
                                     FlaggedRows policy = FlaggedRows::reject);

}  // namespace procgraph

#endif  // PROCGRAPH_MAPPING_HPP
