#include "procgraph/shapes.hpp"

#include <algorithm>
#include <regex>
#include <tuple>
#include <omp.h>

#include "json.hpp"
#include "procgraph/errors.hpp"

namespace procgraph {

namespace {

using nlohmann::json;

std::string resolve_name(std::string_view base, std::string_view name) {
  if (name.find("://") != std::string_view::npos || name.substr(0, 5) == "urn:") {
    return std::string(name);
  }
  return std::string(base) + std::string(name);
}

struct CompiledConstraint {
  const Constraint* source = nullptr;
  std::regex regex;  // compiled iff kind == pattern
};

struct CompiledShape {
  Term target_class;
  Term type_pred;
  std::vector<Term> paths;
  std::vector<CompiledConstraint> constraints;
};

CompiledShape compile_shape(const Shape& shape) {
  CompiledShape cs;
  cs.target_class = Term::make_iri(shape.target_class);
  cs.type_pred = Term::make_iri(std::string(kRdfType));
  for (const auto& c : shape.constraints) {
    cs.paths.push_back(Term::make_iri(c.path));
    CompiledConstraint cc;
    cc.source = &c;
    if (c.kind == ConstraintKind::pattern) {
      try {
        cc.regex = std::regex(c.pattern);
      } catch (const std::regex_error& e) {
        fail(Errc::shape_config, "invalid pattern '" + c.pattern + "': " + e.what());
      }
    }
    cs.constraints.push_back(std::move(cc));
  }
  return cs;
}

void check_focus(const Graph& graph, const CompiledShape& shape, const std::string& focus_iri,
                 const Term& focus, std::vector<Violation>& out) {
  for (std::size_t i = 0; i < shape.constraints.size(); ++i) {
    const Constraint& c = *shape.constraints[i].source;
    auto values = graph.match({focus, shape.paths[i], std::nullopt});
    switch (c.kind) {
      case ConstraintKind::min_count:
        if (values.size() < c.min_count) {
          out.push_back({focus_iri, c.path, c.kind,
                         "expected at least " + std::to_string(c.min_count) + " value(s), found " +
                             std::to_string(values.size()),
                         std::nullopt});
        }
        break;
      case ConstraintKind::datatype:
        for (const auto& t : values) {
          if (t.object.is_iri()) {
            out.push_back({focus_iri, c.path, c.kind, "value is an IRI, expected a literal of <" +
                                                          std::string(datatype_iri(c.datatype)) + ">",
                           t.object});
          } else if (t.object.datatype != c.datatype) {
            out.push_back({focus_iri, c.path, c.kind,
                           "expected datatype <" + std::string(datatype_iri(c.datatype)) +
                               ">, found <" + std::string(datatype_iri(t.object.datatype)) + ">",
                           t.object});
          }
        }
        break;
      case ConstraintKind::min_exclusive:
        for (const auto& t : values) {
          if (t.object.is_iri()) {
            out.push_back({focus_iri, c.path, c.kind, "value is an IRI, expected a number", t.object});
            continue;
          }
          auto parsed = Decimal::parse(t.object.text);
          if (!parsed) {
            out.push_back({focus_iri, c.path, c.kind,
                           "value '" + t.object.text + "' is not numeric", t.object});
            continue;
          }
          if (!(c.min_exclusive < *parsed)) {
            out.push_back({focus_iri, c.path, c.kind,
                           "value " + t.object.text + " is not greater than " + c.min_exclusive.str(),
                           t.object});
          }
        }
        break;
      case ConstraintKind::pattern:
        for (const auto& t : values) {
          const std::string& lexical = t.object.text;
          if (!std::regex_search(lexical, shape.constraints[i].regex)) {
            out.push_back({focus_iri, c.path, c.kind,
                           "value '" + lexical + "' does not match " + c.pattern, t.object});
          }
        }
        break;
    }
  }
}

void sort_report(ValidationReport& report) {
  std::sort(report.violations.begin(), report.violations.end(),
            [](const Violation& a, const Violation& b) {
              return std::tie(a.focus_node, a.path, a.kind, a.message) <
                     std::tie(b.focus_node, b.path, b.kind, b.message);
            });
  report.conforms = report.violations.empty();
}

std::vector<Term> focus_nodes(const Graph& graph, const CompiledShape& shape) {
  std::vector<Term> nodes;
  graph.for_each_match({std::nullopt, shape.type_pred, shape.target_class},
                       [&](const Triple& t) { nodes.push_back(t.subject); });
  return nodes;
}

Constraint make_constraint(ConstraintKind kind, std::string path) {
  Constraint c;
  c.kind = kind;
  c.path = std::move(path);
  return c;
}

void require_frozen(const Graph& graph) {
  if (!graph.frozen()) fail(Errc::argument, "graph must be frozen before validation");
}

}  // namespace

std::string_view constraint_kind_name(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::min_count:
      return "minCount";
    case ConstraintKind::datatype:
      return "datatype";
    case ConstraintKind::min_exclusive:
      return "minExclusive";
    case ConstraintKind::pattern:
      return "pattern";
  }
  return "";
}

ShapeSet builtin_shapes(const Vocabulary& vocab) {
  Shape shape;
  shape.target_class = vocab.contract_class;

  Constraint inst = make_constraint(ConstraintKind::min_count, vocab.has_institution);
  inst.min_count = 1;
  Constraint supp = make_constraint(ConstraintKind::min_count, vocab.has_supplier);
  supp.min_count = 1;
  Constraint amount_dt = make_constraint(ConstraintKind::datatype, vocab.has_amount);
  amount_dt.datatype = Datatype::decimal;
  Constraint amount_pos = make_constraint(ConstraintKind::min_exclusive, vocab.has_amount);
  amount_pos.min_exclusive = Decimal();  // zero
  Constraint date_dt = make_constraint(ConstraintKind::datatype, vocab.has_date);
  date_dt.datatype = Datatype::date;
  Constraint date_pat = make_constraint(ConstraintKind::pattern, vocab.has_date);
  date_pat.pattern = "^\\d{4}-\\d{2}-\\d{2}$";

  shape.constraints = {inst, supp, amount_dt, amount_pos, date_dt, date_pat};
  return ShapeSet{{shape}};
}

ShapeSet parse_shapes(std::string_view doc, std::string_view base_iri) {
  json root;
  try {
    root = json::parse(doc);
  } catch (const json::exception& e) {
    fail(Errc::shape_config, std::string("malformed shapes document: ") + e.what());
  }
  if (!root.is_object() || !root.contains("shapes") || !root["shapes"].is_array()) {
    fail(Errc::shape_config, "shapes document must be an object with a 'shapes' list");
  }
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (it.key() != "shapes") fail(Errc::shape_config, "unknown key '" + it.key() + "'");
  }

  ShapeSet set;
  for (const json& shape_json : root["shapes"]) {
    if (!shape_json.is_object() || !shape_json.contains("target_class") ||
        !shape_json["target_class"].is_string() || !shape_json.contains("constraints") ||
        !shape_json["constraints"].is_array()) {
      fail(Errc::shape_config, "each shape needs target_class and constraints");
    }
    for (auto it = shape_json.begin(); it != shape_json.end(); ++it) {
      if (it.key() != "target_class" && it.key() != "constraints") {
        fail(Errc::shape_config, "unknown key '" + it.key() + "' in shape");
      }
    }
    Shape shape;
    shape.target_class = resolve_name(base_iri, shape_json["target_class"].get<std::string>());
    if (!is_valid_iri(shape.target_class)) {
      fail(Errc::shape_config, "invalid target class IRI: " + shape.target_class);
    }
    for (const json& cj : shape_json["constraints"]) {
      if (!cj.is_object() || !cj.contains("path") || !cj["path"].is_string() ||
          !cj.contains("kind") || !cj["kind"].is_string() || !cj.contains("argument")) {
        fail(Errc::shape_config, "each constraint needs path, kind and argument");
      }
      for (auto it = cj.begin(); it != cj.end(); ++it) {
        if (it.key() != "path" && it.key() != "kind" && it.key() != "argument") {
          fail(Errc::shape_config, "unknown key '" + it.key() + "' in constraint");
        }
      }
      Constraint c;
      c.path = resolve_name(base_iri, cj["path"].get<std::string>());
      if (!is_valid_iri(c.path)) fail(Errc::shape_config, "invalid path IRI: " + c.path);
      std::string kind = cj["kind"].get<std::string>();
      const json& arg = cj["argument"];
      if (kind == "minCount") {
        c.kind = ConstraintKind::min_count;
        if (!arg.is_number_unsigned() || arg.get<std::uint64_t>() < 1) {
          fail(Errc::shape_config, "minCount argument must be an integer >= 1");
        }
        c.min_count = arg.get<std::size_t>();
      } else if (kind == "datatype") {
        c.kind = ConstraintKind::datatype;
        if (!arg.is_string()) fail(Errc::shape_config, "datatype argument must be a name");
        std::string name = arg.get<std::string>();
        std::optional<Datatype> dt;
        if (name == "string") dt = Datatype::string;
        else if (name == "integer") dt = Datatype::integer;
        else if (name == "decimal") dt = Datatype::decimal;
        else if (name == "date") dt = Datatype::date;
        else dt = datatype_from_iri(name);
        if (!dt) fail(Errc::shape_config, "unknown datatype '" + name + "'");
        c.datatype = *dt;
      } else if (kind == "minExclusive") {
        c.kind = ConstraintKind::min_exclusive;
        std::string lexical = arg.is_string() ? arg.get<std::string>() : arg.dump();
        auto parsed = Decimal::parse(lexical);
        if (!parsed) {
          fail(Errc::shape_config, "minExclusive argument must be numeric, got " + lexical);
        }
        c.min_exclusive = *parsed;
      } else if (kind == "pattern") {
        c.kind = ConstraintKind::pattern;
        if (!arg.is_string()) fail(Errc::shape_config, "pattern argument must be a string");
        c.pattern = arg.get<std::string>();
        try {
          std::regex probe(c.pattern);
        } catch (const std::regex_error& e) {
          fail(Errc::shape_config, "invalid pattern '" + c.pattern + "': " + e.what());
        }
      } else {
        fail(Errc::shape_config, "unknown constraint kind '" + kind + "'");
      }
      shape.constraints.push_back(std::move(c));
    }
    set.shapes.push_back(std::move(shape));
  }
  return set;
}

ValidationReport validate_serial(const Graph& graph, const ShapeSet& shapes) {
  require_frozen(graph);
  ValidationReport report;
  for (const auto& shape : shapes.shapes) {
    CompiledShape cs = compile_shape(shape);
    for (const Term& focus : focus_nodes(graph, cs)) {
      check_focus(graph, cs, focus.text, focus, report.violations);
    }
  }
  sort_report(report);
  return report;
}

ValidationReport validate(const Graph& graph, const ShapeSet& shapes) {
  require_frozen(graph);
  ValidationReport report;
  for (const auto& shape : shapes.shapes) {
    CompiledShape cs = compile_shape(shape);
    std::vector<Term> nodes = focus_nodes(graph, cs);
    std::vector<std::vector<Violation>> per_node(nodes.size());

#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      check_focus(graph, cs, nodes[i].text, nodes[i], per_node[i]);
    }
    for (auto& chunk : per_node) {
      for (auto& v : chunk) report.violations.push_back(std::move(v));
    }
  }
  sort_report(report);
  return report;
}

std::string render_report_json(const ValidationReport& report) {
  json out;
  out["conforms"] = report.conforms;
  out["violations"] = json::array();
  for (const auto& v : report.violations) {
    json vj;
    vj["focus_node"] = v.focus_node;
    vj["path"] = v.path;
    vj["constraint"] = std::string(constraint_kind_name(v.kind));
    vj["message"] = v.message;
    if (v.value) vj["value"] = ntriples_render_term(*v.value);
    out["violations"].push_back(std::move(vj));
  }
  return out.dump(2) + "\n";
}

std::string render_report_text(const ValidationReport& report) {
  std::string out = report.conforms ? "conforms: true\n" : "conforms: false\n";
  for (const auto& v : report.violations) {
    out += std::string(constraint_kind_name(v.kind)) + " violation at <" + v.focus_node +
           "> on <" + v.path + ">: " + v.message + "\n";
  }
  return out;
}

}  // namespace procgraph
