#ifndef PROCGRAPH_SHAPES_HPP
#define PROCGRAPH_SHAPES_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "procgraph/decimal.hpp"
#include "procgraph/mapping.hpp"
#include "procgraph/rdf.hpp"

namespace procgraph {

enum class ConstraintKind : std::uint8_t { min_count, datatype, min_exclusive, pattern };

std::string_view constraint_kind_name(ConstraintKind kind);

struct Constraint {
  ConstraintKind kind = ConstraintKind::min_count;
  std::string path;  // predicate IRI
  // Exactly one of these carries the argument, per kind.
  std::size_t min_count = 1;
  Datatype datatype = Datatype::string;
  Decimal min_exclusive;
  std::string pattern;
};

struct Shape {
  std::string target_class;  // IRI
  std::vector<Constraint> constraints;
};

struct ShapeSet {
  std::vector<Shape> shapes;
};

struct Violation {
  std::string focus_node;
  std::string path;
  ConstraintKind kind = ConstraintKind::min_count;
  std::string message;
  std::optional<Term> value;
};

struct ValidationReport {
  bool conforms = true;
  std::vector<Violation> violations;
};

// The contract shape distilled from the domain rules: an institution and a
// supplier are required, amounts are positive decimals, dates are ISO dates.
ShapeSet builtin_shapes(const Vocabulary& vocab);

// JSON shape files; names without a scheme resolve against base_iri.
ShapeSet parse_shapes(std::string_view doc, std::string_view base_iri);

// Focus nodes are the subjects typed with a shape's target class. The graph
// must be frozen. Violations come back sorted by focus node, then path.
ValidationReport validate(const Graph& graph, const ShapeSet& shapes);
ValidationReport validate_serial(const Graph& graph, const ShapeSet& shapes);

std::string render_report_json(const ValidationReport& report);
std::string render_report_text(const ValidationReport& report);

}  // namespace procgraph

#endif  // PROCGRAPH_SHAPES_HPP
