#ifndef PROCGRAPH_QUERY_HPP
#define PROCGRAPH_QUERY_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "procgraph/date.hpp"
#include "procgraph/rdf.hpp"

namespace procgraph {

// One position of a query triple: a concrete term or a variable name.
struct PatternSlot {
  bool is_var = false;
  Term term;
  std::string var;

  static PatternSlot variable(std::string name);
  static PatternSlot constant(Term t);
};

struct QueryTriple {
  PatternSlot subject, predicate, object;
};

enum class BuiltinFn : std::uint8_t { year, month, quarter };
enum class AggregateFn : std::uint8_t { count, sum, avg, min, max, median, stddev };
enum class CompareOp : std::uint8_t { eq, ne, lt, le, gt, ge };

struct Projection {
  enum class Kind : std::uint8_t { variable, aggregate, builtin } kind = Kind::variable;
  std::string var;    // argument variable (unused for COUNT(*))
  std::string alias;  // output column name
  AggregateFn agg = AggregateFn::count;
  bool distinct = false;    // COUNT(DISTINCT ?v)
  bool count_star = false;  // COUNT(*)
  BuiltinFn fn = BuiltinFn::year;
};

struct FilterOperand {
  enum class Kind : std::uint8_t { variable, builtin, constant } kind = Kind::variable;
  std::string var;
  BuiltinFn fn = BuiltinFn::year;
  Term constant;
};

struct Filter {
  FilterOperand lhs, rhs;
  CompareOp op = CompareOp::eq;
  std::string text;  // source slice, quoted by evaluation errors
};

struct OrderKey {
  std::string column;  // an output column name
  bool descending = false;
};

struct QueryPlan {
  std::map<std::string, std::string> prefixes;
  std::vector<Projection> projection;
  std::vector<QueryTriple> patterns;
  std::vector<Filter> filters;
  std::vector<std::string> group_by;
  std::vector<OrderKey> order_by;
  std::optional<std::size_t> limit;

  bool has_aggregate() const;
  bool grouped() const { return has_aggregate() || !group_by.empty(); }
};

struct SolutionTable {
  std::vector<std::string> header;
  std::vector<std::vector<Term>> rows;
};

// Grammar: PREFIX declarations, SELECT with variables and (expr AS ?alias)
// projections, a WHERE block of triple patterns and FILTERs, GROUP BY,
// ORDER BY with ASC()/DESC(), LIMIT. `a` abbreviates the type predicate.
QueryPlan parse_query(std::string_view text);

// Left-to-right index-nested-loop join, post-join filters, grouping,
// aggregation, ordering (stable, full-row tiebreak), limit.
SolutionTable evaluate(const Graph& graph, const QueryPlan& plan);

int builtin_temporal(BuiltinFn fn, const Date& value);
std::string_view builtin_fn_name(BuiltinFn fn);
std::string_view aggregate_fn_name(AggregateFn fn);

// Deterministic cross-type term ordering used by ORDER BY and row tiebreaks:
// numerics by value, dates chronological, strings then IRIs lexicographic.
int compare_terms(const Term& a, const Term& b);

std::string render_solutions_csv(const SolutionTable& table);
std::string render_solutions_json(const SolutionTable& table);

}  // namespace procgraph

#endif  // PROCGRAPH_QUERY_HPP
