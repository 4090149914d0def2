#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "procgraph/errors.hpp"
#include "procgraph/shapes.hpp"

using namespace procgraph;

namespace {

const Vocabulary kVocab = fixtures::sample_spec().vocabulary();

Triple the_triple(const Graph& g, const Term& s, const std::string& p) {
  auto hits = g.match({s, Term::make_iri(p), std::nullopt});
  REQUIRE(hits.size() == 1);
  return hits[0];
}

Term contract_iri(int i) {
  return Term::make_iri("https://procurement.example.org/contract/fix-" + std::to_string(i));
}

ValidationReport validate_mutated(const Graph& clean, Graph mutated) {
  (void)clean;
  mutated.freeze();
  return validate(mutated, builtin_shapes(kVocab));
}

Errc parse_kind(std::string_view doc) {
  try {
    parse_shapes(doc, "https://ex.org/");
  } catch (const Error& e) {
    return e.kind();
  }
  return Errc::io;
}

}  // namespace

TEST_CASE("builtin shape covers the contract rules") {
  ShapeSet set = builtin_shapes(kVocab);
  REQUIRE(set.shapes.size() == 1);
  const Shape& shape = set.shapes[0];
  CHECK(shape.target_class == kVocab.contract_class);

  // one record per enforced rule: two presence checks, two datatype checks,
  // the positivity bound and the ISO pattern
  REQUIRE(shape.constraints.size() == 6);
  auto kind_paths = [&] {
    std::multiset<std::pair<std::string, std::string>> out;
    for (const auto& c : shape.constraints) {
      out.insert({std::string(constraint_kind_name(c.kind)), c.path});
    }
    return out;
  }();
  CHECK(kind_paths.count({"minCount", kVocab.has_institution}) == 1);
  CHECK(kind_paths.count({"minCount", kVocab.has_supplier}) == 1);
  CHECK(kind_paths.count({"datatype", kVocab.has_amount}) == 1);
  CHECK(kind_paths.count({"minExclusive", kVocab.has_amount}) == 1);
  CHECK(kind_paths.count({"datatype", kVocab.has_date}) == 1);
  CHECK(kind_paths.count({"pattern", kVocab.has_date}) == 1);

  std::set<std::string> predicates = {kVocab.has_institution, kVocab.has_supplier,
                                      kVocab.has_amount, kVocab.has_date,
                                      kVocab.has_description};
  for (const auto& c : shape.constraints) CHECK(predicates.count(c.path) == 1);
}

TEST_CASE("mapped output over clean rows conforms") {
  for (auto seed : {1u, 2u, 3u}) {
    Graph g = fixtures::sample_graph(40, 6, 15, seed);
    ValidationReport report = validate(g, builtin_shapes(kVocab));
    CHECK(report.conforms);
    CHECK(report.violations.empty());
  }
}

TEST_CASE("graph without targeted subjects conforms vacuously") {
  Graph g;
  g.insert({Term::make_iri("https://ex.org/a"), Term::make_iri("https://ex.org/p"),
            Term::string_literal("x")});
  g.freeze();
  CHECK(validate(g, builtin_shapes(kVocab)).conforms);
}

TEST_CASE("validation requires a frozen graph") {
  Graph g;
  try {
    validate(g, builtin_shapes(kVocab));
    FAIL("expected argument error");
  } catch (const Error& e) {
    CHECK(e.kind() == Errc::argument);
  }
}

TEST_CASE("each injected defect yields exactly its own violation") {
  Graph clean = fixtures::sample_graph(12, 3, 5);
  Term c1 = contract_iri(1);

  SUBCASE("dropped institution link") {
    auto dirty = fixtures::rebuild_without(clean, [&](const Triple& t) {
      return t.subject == c1 && t.predicate == Term::make_iri(kVocab.has_institution);
    });
    auto report = validate_mutated(clean, std::move(dirty));
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].focus_node == c1.text);
    CHECK(report.violations[0].path == kVocab.has_institution);
    CHECK(report.violations[0].kind == ConstraintKind::min_count);
    CHECK(!report.conforms);
  }

  SUBCASE("dropped supplier link") {
    auto dirty = fixtures::rebuild_without(clean, [&](const Triple& t) {
      return t.subject == c1 && t.predicate == Term::make_iri(kVocab.has_supplier);
    });
    auto report = validate_mutated(clean, std::move(dirty));
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == ConstraintKind::min_count);
    CHECK(report.violations[0].path == kVocab.has_supplier);
  }

  SUBCASE("negative amount") {
    Triple amount = the_triple(clean, c1, kVocab.has_amount);
    auto dirty = fixtures::rebuild_replacing(
        clean, amount, {c1, amount.predicate, Term::decimal_literal("-5")});
    auto report = validate_mutated(clean, std::move(dirty));
    // the datatype rule is satisfied by "-5"; only the bound trips
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == ConstraintKind::min_exclusive);
    CHECK(report.violations[0].path == kVocab.has_amount);
    CHECK(report.violations[0].message.find("not greater than 0") != std::string::npos);
  }

  SUBCASE("zero amount") {
    Triple amount = the_triple(clean, c1, kVocab.has_amount);
    auto dirty = fixtures::rebuild_replacing(clean, amount,
                                             {c1, amount.predicate, Term::decimal_literal("0")});
    auto report = validate_mutated(clean, std::move(dirty));
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == ConstraintKind::min_exclusive);
  }

  SUBCASE("day-first date") {
    Triple date = the_triple(clean, c1, kVocab.has_date);
    auto dirty = fixtures::rebuild_replacing(
        clean, date, {c1, date.predicate, Term::date_literal("31-12-2021")});
    auto report = validate_mutated(clean, std::move(dirty));
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == ConstraintKind::pattern);
    CHECK(report.violations[0].path == kVocab.has_date);
    CHECK(report.violations[0].message.find("31-12-2021") != std::string::npos);
  }

  SUBCASE("amount typed as integer instead of decimal") {
    Triple amount = the_triple(clean, c1, kVocab.has_amount);
    auto dirty = fixtures::rebuild_replacing(
        clean, amount,
        {c1, amount.predicate, Term::make_literal(amount.object.text, Datatype::integer)});
    auto report = validate_mutated(clean, std::move(dirty));
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == ConstraintKind::datatype);
    CHECK(report.violations[0].message.find("expected datatype") != std::string::npos);
  }

  SUBCASE("IRI where a literal belongs fails both amount rules") {
    Triple amount = the_triple(clean, c1, kVocab.has_amount);
    auto dirty = fixtures::rebuild_replacing(
        clean, amount, {c1, amount.predicate, Term::make_iri("https://ex.org/oops")});
    auto report = validate_mutated(clean, std::move(dirty));
    REQUIRE(report.violations.size() == 2);
    CHECK(report.violations[0].kind == ConstraintKind::datatype);
    CHECK(report.violations[1].kind == ConstraintKind::min_exclusive);
  }
}

TEST_CASE("unparseable amount lexical trips the bound with a plain message") {
  Graph clean = fixtures::sample_graph(5, 2, 2);
  Term c2 = contract_iri(2);
  Triple amount = the_triple(clean, c2, kVocab.has_amount);
  auto dirty = fixtures::rebuild_replacing(clean, amount,
                                           {c2, amount.predicate, Term::decimal_literal("")});
  auto report = validate_mutated(clean, std::move(dirty));
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].message == "value '' is not numeric");
}

TEST_CASE("adding a violating triple never removes violations") {
  Graph clean = fixtures::sample_graph(10, 3, 4);
  Term c1 = contract_iri(1);
  Graph dirty = fixtures::rebuild_without(clean, [&](const Triple& t) {
    return t.subject == c1 && t.predicate == Term::make_iri(kVocab.has_supplier);
  });
  Graph frozen_dirty = dirty;  // keep an unfrozen copy to extend
  frozen_dirty.freeze();
  auto before = validate(frozen_dirty, builtin_shapes(kVocab));
  REQUIRE(before.violations.size() == 1);

  dirty.insert({contract_iri(2), Term::make_iri(kVocab.has_amount), Term::decimal_literal("-3")});
  dirty.freeze();
  auto after = validate(dirty, builtin_shapes(kVocab));
  CHECK(after.violations.size() == 2);
  bool kept = std::any_of(after.violations.begin(), after.violations.end(), [&](const Violation& v) {
    return v.focus_node == before.violations[0].focus_node &&
           v.path == before.violations[0].path && v.kind == before.violations[0].kind;
  });
  CHECK(kept);
}

TEST_CASE("violations arrive sorted by focus node then path") {
  Graph clean = fixtures::sample_graph(20, 4, 7);
  Graph dirty = fixtures::rebuild_without(clean, [&](const Triple& t) {
    bool entity_link = t.predicate == Term::make_iri(kVocab.has_institution) ||
                       t.predicate == Term::make_iri(kVocab.has_supplier);
    // break several contracts at once
    return entity_link && (t.subject == contract_iri(3) || t.subject == contract_iri(11) ||
                           t.subject == contract_iri(7));
  });
  dirty.freeze();
  auto report = validate(dirty, builtin_shapes(kVocab));
  REQUIRE(report.violations.size() == 6);
  auto key = [](const Violation& v) { return std::make_pair(v.focus_node, v.path); };
  for (std::size_t i = 1; i < report.violations.size(); ++i) {
    CHECK(key(report.violations[i - 1]) <= key(report.violations[i]));
  }
  CHECK(!report.conforms);
}

TEST_CASE("parallel validation matches the serial reference") {
  Graph clean = fixtures::sample_graph(60, 9, 21);
  Graph dirty = fixtures::rebuild_without(clean, [&](const Triple& t) {
    return t.predicate == Term::make_iri(kVocab.has_supplier) && (t.subject.text.size() % 3 == 0);
  });
  dirty.freeze();
  ShapeSet shapes = builtin_shapes(kVocab);
  CHECK(render_report_json(validate(dirty, shapes)) ==
        render_report_json(validate_serial(dirty, shapes)));
  CHECK(render_report_json(validate(clean, shapes)) ==
        render_report_json(validate_serial(clean, shapes)));
}

TEST_CASE("shape documents parse with names resolved against the base") {
  ShapeSet set = parse_shapes(R"({
    "shapes": [
      {
        "target_class": "Contract",
        "constraints": [
          { "path": "hasInstitution", "kind": "minCount", "argument": 1 },
          { "path": "hasAmount", "kind": "datatype", "argument": "decimal" },
          { "path": "hasAmount", "kind": "minExclusive", "argument": "0" },
          { "path": "https://other.org/date", "kind": "pattern", "argument": "^\\d{4}" }
        ]
      }
    ]
  })",
                              "https://ex.org/");
  REQUIRE(set.shapes.size() == 1);
  CHECK(set.shapes[0].target_class == "https://ex.org/Contract");
  REQUIRE(set.shapes[0].constraints.size() == 4);
  CHECK(set.shapes[0].constraints[0].min_count == 1);
  CHECK(set.shapes[0].constraints[1].datatype == Datatype::decimal);
  CHECK(set.shapes[0].constraints[2].min_exclusive == Decimal());
  CHECK(set.shapes[0].constraints[3].path == "https://other.org/date");
}

TEST_CASE("shape document errors") {
  CHECK(parse_kind("{") == Errc::shape_config);
  CHECK(parse_kind("[]") == Errc::shape_config);
  CHECK(parse_kind(R"({"shaps": []})") == Errc::shape_config);
  CHECK(parse_kind(R"({"shapes": [], "extra": 1})") == Errc::shape_config);
  CHECK(parse_kind(R"({"shapes": [{"target_class": "C", "constraints": [], "x": 1}]})") ==
        Errc::shape_config);
  auto one = [](std::string constraint) {
    return std::string(R"({"shapes": [{"target_class": "C", "constraints": [)") + constraint +
           "]}]}";
  };
  CHECK(parse_kind(one(R"({"path": "p", "kind": "minCount", "argument": 0})")) ==
        Errc::shape_config);
  CHECK(parse_kind(one(R"({"path": "p", "kind": "minCount", "argument": "two"})")) ==
        Errc::shape_config);
  CHECK(parse_kind(one(R"({"path": "p", "kind": "datatype", "argument": "float"})")) ==
        Errc::shape_config);
  CHECK(parse_kind(one(R"({"path": "p", "kind": "minExclusive", "argument": "abc"})")) ==
        Errc::shape_config);
  CHECK(parse_kind(one(R"({"path": "p", "kind": "pattern", "argument": "("})")) ==
        Errc::shape_config);
  CHECK(parse_kind(one(R"({"path": "p", "kind": "maxCount", "argument": 1})")) ==
        Errc::shape_config);
  CHECK(parse_kind(one(R"({"path": "p", "kind": "minCount"})")) == Errc::shape_config);
}

TEST_CASE("json report carries the full violation records") {
  Graph clean = fixtures::sample_graph(4, 2, 2);
  Term c1 = contract_iri(1);
  Triple date = the_triple(clean, c1, kVocab.has_date);
  auto dirty = fixtures::rebuild_replacing(clean, date,
                                           {c1, date.predicate, Term::date_literal("soon")});
  dirty.freeze();
  auto report = validate(dirty, builtin_shapes(kVocab));
  std::string json_text = render_report_json(report);
  CHECK(json_text.find("\"conforms\": false") != std::string::npos);
  CHECK(json_text.find("\"constraint\": \"pattern\"") != std::string::npos);
  CHECK(json_text.find(c1.text) != std::string::npos);
  CHECK(json_text.find("soon") != std::string::npos);

  std::string text = render_report_text(report);
  CHECK(text.substr(0, 15) == "conforms: false");
  CHECK(text.find("pattern violation at <" + c1.text + ">") != std::string::npos);

  Graph ok = fixtures::sample_graph(4, 2, 2);
  CHECK(render_report_text(validate(ok, builtin_shapes(kVocab))) == "conforms: true\n");
}
