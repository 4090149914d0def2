#include "procgraph/mapping.hpp"

#include <charconv>
#include <map>
#include <omp.h>

#include "json.hpp"
#include "procgraph/errors.hpp"
#include "procgraph/text.hpp"

namespace procgraph {

namespace {

using nlohmann::json;

std::string resolve_name(std::string_view base, std::string_view name) {
  if (name.find("://") != std::string_view::npos || name.substr(0, 5) == "urn:") {
    return std::string(name);
  }
  return std::string(base) + std::string(name);
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto a : allowed) {
      if (it.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) fail(Errc::mapping_config, "unknown key '" + it.key() + "' in " + where);
  }
}

ObjectSpec object_spec_from_name(const std::string& name) {
  if (name == "institution") return ObjectSpec::institution_ref;
  if (name == "supplier") return ObjectSpec::supplier_ref;
  if (name == "string") return ObjectSpec::literal_string;
  if (name == "integer") return ObjectSpec::literal_integer;
  if (name == "decimal") return ObjectSpec::literal_decimal;
  if (name == "date") return ObjectSpec::literal_date;
  fail(Errc::mapping_config, "unknown datatype '" + name + "' in property rule");
}

ClassRule parse_class_rule(const json& obj, std::string_view base, const std::string& where) {
  if (!obj.is_object()) fail(Errc::mapping_config, where + " must be an object");
  reject_unknown_keys(obj, {"segment", "class"}, where);
  if (!obj.contains("segment") || !obj["segment"].is_string()) {
    fail(Errc::mapping_config, where + ": missing segment");
  }
  if (!obj.contains("class") || !obj["class"].is_string()) {
    fail(Errc::mapping_config, where + ": missing class");
  }
  ClassRule rule;
  rule.segment = obj["segment"].get<std::string>();
  rule.class_iri = resolve_name(base, obj["class"].get<std::string>());
  if (rule.segment.empty()) fail(Errc::mapping_config, where + ": empty segment");
  if (!is_valid_iri(rule.class_iri)) {
    fail(Errc::mapping_config, where + ": invalid class IRI " + rule.class_iri);
  }
  return rule;
}

// Distinct entity accumulator: IRI -> (label, first row seen).
using EntityMap = std::map<std::string, std::pair<std::string, std::size_t>>;

struct ChunkOutput {
  std::vector<Triple> triples;
  EntityMap institutions;
  EntityMap suppliers;
  std::vector<MappingDiagnostic> diagnostics;
};

void note_entity(EntityMap& map, const std::string& iri, const std::string& label,
                 std::size_t row) {
  auto [it, inserted] = map.emplace(iri, std::make_pair(label, row));
  if (!inserted && row < it->second.second) it->second = {label, row};
}

void map_rows(const RecordTable& table, const MappingSpec& spec,
              const std::vector<std::size_t>& column_of, std::size_t begin, std::size_t end,
              ChunkOutput& out) {
  const Term type_pred = Term::make_iri(std::string(kRdfType));
  const Term contract_class = Term::make_iri(spec.contract.class_iri);

  for (std::size_t r = begin; r < end; ++r) {
    const auto& meta = table.meta[r];
    std::string contract_iri;
    try {
      contract_iri = mint_iri(spec.base_iri, spec.contract.segment, meta.record_id);
    } catch (const Error& e) {
      out.diagnostics.push_back({r, meta.record_id, std::string("contract IRI: ") + e.what()});
      continue;
    }
    Term contract = Term::make_iri(contract_iri);
    out.triples.push_back({contract, type_pred, contract_class});

    for (std::size_t p = 0; p < spec.properties.size(); ++p) {
      const PropertyRule& rule = spec.properties[p];
      const std::string& cell = table.cells[r][column_of[p]];
      Term predicate = Term::make_iri(rule.predicate);
      switch (rule.object) {
        case ObjectSpec::institution_ref:
        case ObjectSpec::supplier_ref: {
          bool inst = rule.object == ObjectSpec::institution_ref;
          std::string label = trim(cell);
          if (label.empty()) {
            out.diagnostics.push_back({r, meta.record_id, "empty " + rule.column + " cell"});
            break;
          }
          const ClassRule& cls = inst ? spec.institution : spec.supplier;
          try {
            std::string iri = mint_iri(spec.base_iri, cls.segment, label);
            out.triples.push_back({contract, predicate, Term::make_iri(iri)});
            note_entity(inst ? out.institutions : out.suppliers, iri, label, r);
          } catch (const Error& e) {
            out.diagnostics.push_back({r, meta.record_id, rule.column + ": " + e.what()});
          }
          break;
        }
        case ObjectSpec::literal_string:
          out.triples.push_back({contract, predicate, Term::string_literal(cell)});
          break;
        case ObjectSpec::literal_integer: {
          std::int64_t value = 0;
          auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
          if (res.ec == std::errc() && res.ptr == cell.data() + cell.size()) {
            out.triples.push_back({contract, predicate, Term::integer_literal(value)});
          } else {
            out.diagnostics.push_back({r, meta.record_id, rule.column + ": not an integer: " + cell});
            out.triples.push_back({contract, predicate, Term::make_literal(cell, Datatype::integer)});
          }
          break;
        }
        case ObjectSpec::literal_decimal:
          try {
            std::int64_t amount = parse_amount(cell);
            out.triples.push_back({contract, predicate, Term::decimal_literal(std::to_string(amount))});
          } catch (const Error& e) {
            out.diagnostics.push_back({r, meta.record_id, rule.column + ": " + e.what()});
            out.triples.push_back({contract, predicate, Term::make_literal(cell, Datatype::decimal)});
          }
          break;
        case ObjectSpec::literal_date:
          try {
            Date date = parse_date(cell);
            out.triples.push_back({contract, predicate, Term::date_literal(date.iso())});
          } catch (const Error& e) {
            out.diagnostics.push_back({r, meta.record_id, rule.column + ": " + e.what()});
            out.triples.push_back({contract, predicate, Term::make_literal(cell, Datatype::date)});
          }
          break;
      }
    }
  }
}

MappingResult assemble(const MappingSpec& spec, std::vector<ChunkOutput> chunks) {
  MappingResult result;
  EntityMap institutions;
  EntityMap suppliers;
  for (auto& chunk : chunks) {
    for (auto& triple : chunk.triples) result.graph.insert(triple);
    for (auto& [iri, info] : chunk.institutions) {
      note_entity(institutions, iri, info.first, info.second);
    }
    for (auto& [iri, info] : chunk.suppliers) note_entity(suppliers, iri, info.first, info.second);
    for (auto& d : chunk.diagnostics) result.diagnostics.push_back(std::move(d));
  }

  const Term type_pred = Term::make_iri(std::string(kRdfType));
  const Term label_pred = Term::make_iri(std::string(kRdfsLabel));
  auto emit_entities = [&](const EntityMap& map, const std::string& class_iri) {
    Term cls = Term::make_iri(class_iri);
    for (const auto& [iri, info] : map) {
      Term entity = Term::make_iri(iri);
      result.graph.insert({entity, type_pred, cls});
      result.graph.insert({entity, label_pred, Term::string_literal(info.first)});
    }
  };
  emit_entities(institutions, spec.institution.class_iri);
  emit_entities(suppliers, spec.supplier.class_iri);
  return result;
}

std::vector<std::size_t> resolve_columns(const RecordTable& table, const MappingSpec& spec) {
  std::vector<std::size_t> column_of;
  column_of.reserve(spec.properties.size());
  for (const auto& rule : spec.properties) {
    std::size_t idx = table.column_index(rule.column);
    if (idx == static_cast<std::size_t>(-1)) {
      fail(Errc::mapping_config, "property rule references missing column '" + rule.column + "'");
    }
    column_of.push_back(idx);
  }
  return column_of;
}

void check_policy(const RecordTable& table, FlaggedRows policy) {
  if (policy == FlaggedRows::reject) {
    std::size_t flagged = table.flagged_count();
    if (flagged > 0) {
      fail(Errc::flagged_rows_present,
           "table has " + std::to_string(flagged) +
               " flagged row(s); rerun with flagged rows included to map them");
    }
  }
}

}  // namespace

Vocabulary Vocabulary::for_base(std::string_view base_iri) {
  Vocabulary v;
  v.base_iri = std::string(base_iri);
  v.contract_class = v.base_iri + "Contract";
  v.institution_class = v.base_iri + "Institution";
  v.supplier_class = v.base_iri + "Supplier";
  v.has_institution = v.base_iri + "hasInstitution";
  v.has_supplier = v.base_iri + "hasSupplier";
  v.has_amount = v.base_iri + "hasAmount";
  v.has_date = v.base_iri + "hasDate";
  v.has_description = v.base_iri + "hasDescription";
  return v;
}

std::string_view entity_kind_name(EntityKind kind) {
  switch (kind) {
    case EntityKind::contract:
      return "contract";
    case EntityKind::institution:
      return "institution";
    case EntityKind::supplier:
      return "supplier";
  }
  return "";
}

Vocabulary MappingSpec::vocabulary() const {
  Vocabulary v = Vocabulary::for_base(base_iri);
  v.contract_class = contract.class_iri;
  v.institution_class = institution.class_iri;
  v.supplier_class = supplier.class_iri;
  for (const auto& rule : properties) {
    switch (rule.object) {
      case ObjectSpec::institution_ref:
        v.has_institution = rule.predicate;
        break;
      case ObjectSpec::supplier_ref:
        v.has_supplier = rule.predicate;
        break;
      case ObjectSpec::literal_decimal:
        v.has_amount = rule.predicate;
        break;
      case ObjectSpec::literal_date:
        v.has_date = rule.predicate;
        break;
      case ObjectSpec::literal_string:
        v.has_description = rule.predicate;
        break;
      default:
        break;
    }
  }
  return v;
}

MappingSpec parse_mapping(std::string_view doc) {
  json root;
  try {
    root = json::parse(doc);
  } catch (const json::exception& e) {
    fail(Errc::mapping_config, std::string("malformed mapping document: ") + e.what());
  }
  if (!root.is_object()) fail(Errc::mapping_config, "mapping document must be a JSON object");
  reject_unknown_keys(root, {"base_iri", "entities", "properties"}, "mapping document");

  if (!root.contains("base_iri") || !root["base_iri"].is_string()) {
    fail(Errc::mapping_config, "missing base_iri");
  }
  MappingSpec spec;
  spec.base_iri = root["base_iri"].get<std::string>();
  if (!is_valid_iri(spec.base_iri) || spec.base_iri.back() != '/') {
    fail(Errc::mapping_config, "base_iri must be an absolute IRI ending with '/'");
  }

  if (!root.contains("entities") || !root["entities"].is_object()) {
    fail(Errc::mapping_config, "missing entities section");
  }
  const json& entities = root["entities"];
  reject_unknown_keys(entities, {"contract", "institution", "supplier"}, "entities");
  for (auto kind : {"contract", "institution", "supplier"}) {
    if (!entities.contains(kind)) {
      fail(Errc::mapping_config, std::string("entities: missing ") + kind);
    }
  }
  spec.contract = parse_class_rule(entities["contract"], spec.base_iri, "entities.contract");
  spec.institution = parse_class_rule(entities["institution"], spec.base_iri, "entities.institution");
  spec.supplier = parse_class_rule(entities["supplier"], spec.base_iri, "entities.supplier");

  if (!root.contains("properties") || !root["properties"].is_array()) {
    fail(Errc::mapping_config, "missing properties list");
  }
  for (const json& rule_json : root["properties"]) {
    if (!rule_json.is_object()) fail(Errc::mapping_config, "property rule must be an object");
    reject_unknown_keys(rule_json, {"column", "predicate", "datatype"}, "property rule");
    for (auto key : {"column", "predicate", "datatype"}) {
      if (!rule_json.contains(key) || !rule_json[key].is_string()) {
        fail(Errc::mapping_config, std::string("property rule: missing ") + key);
      }
    }
    PropertyRule rule;
    rule.column = rule_json["column"].get<std::string>();
    rule.predicate = resolve_name(spec.base_iri, rule_json["predicate"].get<std::string>());
    rule.object = object_spec_from_name(rule_json["datatype"].get<std::string>());
    if (!is_valid_iri(rule.predicate)) {
      fail(Errc::mapping_config, "invalid predicate IRI: " + rule.predicate);
    }
    for (const auto& existing : spec.properties) {
      if (existing.column == rule.column && existing.predicate == rule.predicate) {
        fail(Errc::duplicate_rule,
             "duplicate rule: column '" + rule.column + "' already maps to " + rule.predicate);
      }
    }
    spec.properties.push_back(std::move(rule));
  }
  return spec;
}

MappingSpec default_mapping(std::string_view base_iri) {
  MappingSpec spec;
  spec.base_iri = std::string(base_iri);
  if (!is_valid_iri(spec.base_iri) || spec.base_iri.empty() || spec.base_iri.back() != '/') {
    fail(Errc::mapping_config, "base_iri must be an absolute IRI ending with '/'");
  }
  Vocabulary v = Vocabulary::for_base(base_iri);
  spec.contract = {"contract", v.contract_class};
  spec.institution = {"institution", v.institution_class};
  spec.supplier = {"supplier", v.supplier_class};
  spec.properties = {
      {"authority", v.has_institution, ObjectSpec::institution_ref},
      {"supplier", v.has_supplier, ObjectSpec::supplier_ref},
      {"amount", v.has_amount, ObjectSpec::literal_decimal},
      {"date", v.has_date, ObjectSpec::literal_date},
      {"subject", v.has_description, ObjectSpec::literal_string},
  };
  return spec;
}

std::string mint_iri(std::string_view base, const std::string& segment, std::string_view label) {
  std::string slug = slugify(label);
  if (slug.empty()) {
    fail(Errc::empty_slug, "label '" + std::string(label) + "' has no sluggable characters");
  }
  std::string iri = std::string(base) + segment + "/" + slug;
  if (!is_valid_iri(iri)) fail(Errc::invalid_iri, "minted IRI is invalid: " + iri);
  return iri;
}

MappingResult execute_mapping_serial(const RecordTable& table, const MappingSpec& spec,
                                     FlaggedRows policy) {
  check_policy(table, policy);
  auto column_of = resolve_columns(table, spec);
  std::vector<ChunkOutput> chunks(1);
  map_rows(table, spec, column_of, 0, table.row_count(), chunks[0]);
  return assemble(spec, std::move(chunks));
}

MappingResult execute_mapping(const RecordTable& table, const MappingSpec& spec,
                              FlaggedRows policy) {
  check_policy(table, policy);
  auto column_of = resolve_columns(table, spec);

  std::size_t rows = table.row_count();
  int threads = omp_get_max_threads();
  std::size_t chunk_count = std::max<std::size_t>(1, static_cast<std::size_t>(threads));
  chunk_count = std::min(chunk_count, std::max<std::size_t>(rows, 1));
  std::vector<ChunkOutput> chunks(chunk_count);
  std::size_t per_chunk = (rows + chunk_count - 1) / std::max<std::size_t>(chunk_count, 1);

#pragma omp parallel for schedule(static, 1)
  for (std::size_t c = 0; c < chunk_count; ++c) {
    std::size_t begin = c * per_chunk;
    std::size_t end = std::min(rows, begin + per_chunk);
    if (begin < end) map_rows(table, spec, column_of, begin, end, chunks[c]);
  }
  return assemble(spec, std::move(chunks));
}

}  // namespace procgraph
