#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "procgraph/csv.hpp"
#include "procgraph/decimal.hpp"
#include "procgraph/errors.hpp"
#include "procgraph/query.hpp"
#include "procgraph/text.hpp"

#include "json.hpp"

namespace procgraph {

namespace {

std::optional<Decimal> term_decimal(const Term& t) {
  if (t.is_iri()) return std::nullopt;
  if (t.datatype != Datatype::integer && t.datatype != Datatype::decimal) return std::nullopt;
  return Decimal::parse(t.text);
}

std::optional<Date> term_date(const Term& t) {
  if (t.is_iri() || t.datatype != Datatype::date) return std::nullopt;
  return parse_iso_date(t.text);
}

int builtin_over_term(BuiltinFn fn, const Term& t, const std::string& context) {
  auto date = term_date(t);
  if (!date) {
    fail(Errc::eval_error, context + ": " + std::string(builtin_fn_name(fn)) +
                               " needs a date, got '" + t.text + "'");
  }
  return builtin_temporal(fn, *date);
}

// Variable name -> slot, assigned in first-appearance order over the patterns.
struct VarTable {
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;

  std::size_t id(const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    index.emplace(name, names.size());
    names.push_back(name);
    return names.size() - 1;
  }

  std::size_t require(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) fail(Errc::eval_error, "unbound variable ?" + name);
    return it->second;
  }
};

std::vector<std::vector<Term>> join_patterns(const Graph& graph, const QueryPlan& plan,
                                             VarTable& vars) {
  for (const auto& p : plan.patterns) {
    for (const PatternSlot* s : {&p.subject, &p.predicate, &p.object}) {
      if (s->is_var) vars.id(s->var);
    }
  }

  std::vector<std::vector<Term>> rows;
  rows.emplace_back(vars.names.size());
  std::vector<bool> bound(vars.names.size(), false);

  for (const auto& pattern : plan.patterns) {
    const PatternSlot* slots[3] = {&pattern.subject, &pattern.predicate, &pattern.object};
    std::size_t slot_var[3];
    for (int i = 0; i < 3; ++i) {
      slot_var[i] = slots[i]->is_var ? vars.require(slots[i]->var) : static_cast<std::size_t>(-1);
    }

    std::vector<std::vector<Term>> next;
    for (const auto& row : rows) {
      TriplePattern probe;
      PatternTerm* positions[3] = {&probe.subject, &probe.predicate, &probe.object};
      for (int i = 0; i < 3; ++i) {
        if (!slots[i]->is_var) {
          *positions[i] = slots[i]->term;
        } else if (bound[slot_var[i]]) {
          *positions[i] = row[slot_var[i]];
        }
      }
      graph.for_each_match(probe, [&](const Triple& t) {
        const Term* found[3] = {&t.subject, &t.predicate, &t.object};
        std::vector<Term> extended = row;
        // Repeated variables inside one pattern must agree across positions.
        for (int i = 0; i < 3; ++i) {
          if (slot_var[i] == static_cast<std::size_t>(-1)) continue;
          Term& cell = extended[slot_var[i]];
          bool already = bound[slot_var[i]];
          for (int j = 0; j < i; ++j) {
            if (slot_var[j] == slot_var[i]) already = true;
          }
          if (already) {
            if (!(cell == *found[i])) return;
          } else {
            cell = *found[i];
          }
        }
        next.push_back(std::move(extended));
      });
    }
    for (int i = 0; i < 3; ++i) {
      if (slot_var[i] != static_cast<std::size_t>(-1)) bound[slot_var[i]] = true;
    }
    rows = std::move(next);
  }
  return rows;
}

enum class ValueClass : std::uint8_t { numeric, date, string, iri, malformed };

struct TypedValue {
  ValueClass cls = ValueClass::malformed;
  Decimal number;
  Date date{};
  const Term* term = nullptr;
};

TypedValue classify(const Term& t) {
  TypedValue v;
  v.term = &t;
  if (t.is_iri()) {
    v.cls = ValueClass::iri;
    return v;
  }
  switch (t.datatype) {
    case Datatype::integer:
    case Datatype::decimal:
      if (auto d = Decimal::parse(t.text)) {
        v.cls = ValueClass::numeric;
        v.number = *d;
      }
      return v;
    case Datatype::date:
      if (auto d = term_date(t)) {
        v.cls = ValueClass::date;
        v.date = *d;
      }
      return v;
    case Datatype::string:
      v.cls = ValueClass::string;
      return v;
  }
  return v;
}

TypedValue integer_value(int n, Term& storage) {
  storage = Term::integer_literal(n);
  TypedValue v;
  v.cls = ValueClass::numeric;
  v.number = *Decimal::parse(storage.text);
  v.term = &storage;
  return v;
}

bool apply_compare(CompareOp op, int cmp) {
  switch (op) {
    case CompareOp::eq:
      return cmp == 0;
    case CompareOp::ne:
      return cmp != 0;
    case CompareOp::lt:
      return cmp < 0;
    case CompareOp::le:
      return cmp <= 0;
    case CompareOp::gt:
      return cmp > 0;
    case CompareOp::ge:
      return cmp >= 0;
  }
  return false;
}

bool eval_filter(const Filter& f, const std::vector<Term>& row, const VarTable& vars) {
  Term lhs_storage, rhs_storage;
  auto value_of = [&](const FilterOperand& op, Term& storage) -> TypedValue {
    switch (op.kind) {
      case FilterOperand::Kind::variable:
        return classify(row[vars.require(op.var)]);
      case FilterOperand::Kind::builtin: {
        const Term& t = row[vars.require(op.var)];
        auto date = term_date(t);
        if (!date) {
          fail(Errc::filter_type_error, "type error in filter (" + f.text + "): " +
                                            std::string(builtin_fn_name(op.fn)) +
                                            " needs a date, got '" + t.text + "'");
        }
        return integer_value(builtin_temporal(op.fn, *date), storage);
      }
      case FilterOperand::Kind::constant:
        return classify(op.constant);
    }
    fail(Errc::eval_error, "bad filter operand");
  };

  TypedValue lhs = value_of(f.lhs, lhs_storage);
  TypedValue rhs = value_of(f.rhs, rhs_storage);
  if (lhs.cls == ValueClass::malformed || rhs.cls == ValueClass::malformed) {
    fail(Errc::filter_type_error, "type error in filter (" + f.text + "): value '" +
                                      (lhs.cls == ValueClass::malformed ? lhs.term->text
                                                                        : rhs.term->text) +
                                      "' is malformed");
  }
  if (lhs.cls != rhs.cls) {
    fail(Errc::filter_type_error,
         "type error in filter (" + f.text + "): incomparable operand types");
  }
  int cmp = 0;
  switch (lhs.cls) {
    case ValueClass::numeric:
      cmp = lhs.number == rhs.number ? 0 : (lhs.number < rhs.number ? -1 : 1);
      break;
    case ValueClass::date:
      cmp = lhs.date == rhs.date ? 0 : (lhs.date < rhs.date ? -1 : 1);
      break;
    case ValueClass::string:
    case ValueClass::iri: {
      const std::string& a = lhs.term->text;
      const std::string& b = rhs.term->text;
      cmp = a == b ? 0 : (a < b ? -1 : 1);
      break;
    }
    case ValueClass::malformed:
      break;
  }
  return apply_compare(f.op, cmp);
}

std::vector<Decimal> numeric_group(const std::vector<const Term*>& values,
                                   const Projection& p) {
  std::vector<Decimal> out;
  out.reserve(values.size());
  for (const Term* t : values) {
    auto d = term_decimal(*t);
    if (!d) {
      fail(Errc::eval_error, std::string(aggregate_fn_name(p.agg)) + "(?" + p.var +
                                 "): value '" + t->text + "' is not numeric");
    }
    out.push_back(*d);
  }
  return out;
}

Term eval_aggregate(const Projection& p, const std::vector<const Term*>& values) {
  const std::string label = std::string(aggregate_fn_name(p.agg)) + "(?" + p.var + ")";
  switch (p.agg) {
    case AggregateFn::count: {
      if (p.count_star) return Term::integer_literal(static_cast<std::int64_t>(values.size()));
      if (!p.distinct) return Term::integer_literal(static_cast<std::int64_t>(values.size()));
      std::set<Term> distinct;
      for (const Term* t : values) distinct.insert(*t);
      return Term::integer_literal(static_cast<std::int64_t>(distinct.size()));
    }
    case AggregateFn::sum: {
      Decimal total;
      for (const Decimal& d : numeric_group(values, p)) total = total.plus(d);
      return Term::decimal_literal(total.str());
    }
    case AggregateFn::avg: {
      if (values.empty()) fail(Errc::eval_error, label + " over an empty group");
      auto nums = numeric_group(values, p);
      double sum = 0.0;
      for (const Decimal& d : nums) sum += d.to_double();
      return Term::decimal_literal(format_double(sum / static_cast<double>(nums.size())));
    }
    case AggregateFn::min:
    case AggregateFn::max: {
      if (values.empty()) fail(Errc::eval_error, label + " over an empty group");
      const Term* best = values[0];
      TypedValue best_v = classify(*best);
      if (best_v.cls == ValueClass::malformed) {
        fail(Errc::eval_error, label + ": value '" + best->text + "' is malformed");
      }
      for (std::size_t i = 1; i < values.size(); ++i) {
        TypedValue v = classify(*values[i]);
        if (v.cls != best_v.cls) {
          fail(Errc::eval_error, label + ": mixed value types in group");
        }
        int cmp = 0;
        switch (v.cls) {
          case ValueClass::numeric:
            cmp = v.number == best_v.number ? 0 : (v.number < best_v.number ? -1 : 1);
            break;
          case ValueClass::date:
            cmp = v.date == best_v.date ? 0 : (v.date < best_v.date ? -1 : 1);
            break;
          default:
            cmp = v.term->text.compare(best_v.term->text);
        }
        bool better = p.agg == AggregateFn::min ? cmp < 0 : cmp > 0;
        if (better) {
          best = values[i];
          best_v = v;
        }
      }
      return *best;
    }
    case AggregateFn::median: {
      if (values.empty()) fail(Errc::eval_error, label + " over an empty group");
      auto nums = numeric_group(values, p);
      std::sort(nums.begin(), nums.end());
      std::size_t n = nums.size();
      if (n % 2 == 1) return Term::decimal_literal(nums[n / 2].str());
      return Term::decimal_literal(Decimal::midpoint(nums[n / 2 - 1], nums[n / 2]).str());
    }
    case AggregateFn::stddev: {
      if (values.empty()) fail(Errc::eval_error, label + " over an empty group");
      auto nums = numeric_group(values, p);
      if (nums.size() == 1) return Term::decimal_literal("0");
      double mean = 0.0;
      for (const Decimal& d : nums) mean += d.to_double();
      mean /= static_cast<double>(nums.size());
      double acc = 0.0;
      for (const Decimal& d : nums) {
        double delta = d.to_double() - mean;
        acc += delta * delta;
      }
      double var = acc / static_cast<double>(nums.size() - 1);
      return Term::decimal_literal(format_double(std::sqrt(var)));
    }
  }
  fail(Errc::eval_error, "unknown aggregate");
}

}  // namespace

int builtin_temporal(BuiltinFn fn, const Date& value) {
  switch (fn) {
    case BuiltinFn::year:
      return value.year;
    case BuiltinFn::month:
      return value.month;
    case BuiltinFn::quarter:
      return value.quarter();
  }
  return 0;
}

int compare_terms(const Term& a, const Term& b) {
  TypedValue va = classify(a);
  TypedValue vb = classify(b);
  auto rank = [](ValueClass c) {
    switch (c) {
      case ValueClass::numeric:
        return 0;
      case ValueClass::date:
        return 1;
      case ValueClass::string:
        return 2;
      case ValueClass::iri:
        return 3;
      case ValueClass::malformed:
        return 4;
    }
    return 5;
  };
  if (rank(va.cls) != rank(vb.cls)) return rank(va.cls) < rank(vb.cls) ? -1 : 1;
  switch (va.cls) {
    case ValueClass::numeric:
      if (!(va.number == vb.number)) return va.number < vb.number ? -1 : 1;
      break;
    case ValueClass::date:
      if (!(va.date == vb.date)) return va.date < vb.date ? -1 : 1;
      break;
    default:
      break;
  }
  // Total order even across equal values and malformed lexicals.
  if (a.text != b.text) return a.text < b.text ? -1 : 1;
  if (a.is_iri() != b.is_iri()) return a.is_iri() ? -1 : 1;
  if (a.datatype != b.datatype) return a.datatype < b.datatype ? -1 : 1;
  return 0;
}

SolutionTable evaluate(const Graph& graph, const QueryPlan& plan) {
  if (!graph.frozen()) fail(Errc::argument, "graph must be frozen before evaluation");

  VarTable vars;
  std::vector<std::vector<Term>> rows = join_patterns(graph, plan, vars);

  if (!plan.filters.empty()) {
    std::vector<std::vector<Term>> kept;
    kept.reserve(rows.size());
    for (auto& row : rows) {
      bool pass = true;
      for (const auto& f : plan.filters) {
        if (!eval_filter(f, row, vars)) {
          pass = false;
          break;
        }
      }
      if (pass) kept.push_back(std::move(row));
    }
    rows = std::move(kept);
  }

  // Builtin projections become computed columns next to the pattern variables.
  std::map<std::string, std::size_t> computed;  // alias -> extended column
  std::size_t width = vars.names.size();
  for (const auto& p : plan.projection) {
    if (p.kind == Projection::Kind::builtin) computed.emplace(p.alias, width++);
  }
  for (auto& row : rows) {
    row.resize(width);
    for (const auto& p : plan.projection) {
      if (p.kind != Projection::Kind::builtin) continue;
      const Term& arg = row[vars.require(p.var)];
      int n = builtin_over_term(p.fn, arg, std::string(builtin_fn_name(p.fn)) + "(?" + p.var + ")");
      row[computed.at(p.alias)] = Term::integer_literal(n);
    }
  }

  auto column_of = [&](const std::string& name) -> std::size_t {
    auto it = computed.find(name);
    if (it != computed.end()) return it->second;
    return vars.require(name);
  };

  SolutionTable table;
  for (const auto& p : plan.projection) table.header.push_back(p.alias);

  if (plan.grouped()) {
    std::vector<std::size_t> key_cols;
    key_cols.reserve(plan.group_by.size());
    for (const auto& g : plan.group_by) key_cols.push_back(column_of(g));

    std::map<std::vector<Term>, std::size_t> group_index;
    std::vector<std::vector<std::size_t>> groups;  // row indexes, first-seen order
    std::vector<std::vector<Term>> group_keys;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::vector<Term> key;
      key.reserve(key_cols.size());
      for (std::size_t c : key_cols) key.push_back(rows[r][c]);
      auto [it, inserted] = group_index.emplace(std::move(key), groups.size());
      if (inserted) {
        groups.emplace_back();
        group_keys.push_back(it->first);
      }
      groups[it->second].push_back(r);
    }
    if (groups.empty() && plan.group_by.empty()) {
      groups.emplace_back();  // aggregates over no solutions: one empty group
      group_keys.emplace_back();
    }

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      std::vector<Term> out_row;
      out_row.reserve(plan.projection.size());
      for (const auto& p : plan.projection) {
        if (p.kind == Projection::Kind::aggregate) {
          std::vector<const Term*> values;
          values.reserve(groups[gi].size());
          if (!p.count_star) {
            std::size_t col = column_of(p.var);
            for (std::size_t r : groups[gi]) values.push_back(&rows[r][col]);
          } else {
            for (std::size_t r : groups[gi]) values.push_back(&rows[r][0]);
          }
          out_row.push_back(eval_aggregate(p, values));
        } else {
          // Grouped bare/builtin column: constant within the group by the
          // parser's ungrouped-variable check.
          std::size_t col = column_of(p.kind == Projection::Kind::builtin ? p.alias : p.var);
          if (groups[gi].empty()) {
            fail(Errc::eval_error, "?" + p.alias + " has no value in an empty group");
          }
          out_row.push_back(rows[groups[gi].front()][col]);
        }
      }
      table.rows.push_back(std::move(out_row));
    }
  } else {
    for (const auto& row : rows) {
      std::vector<Term> out_row;
      out_row.reserve(plan.projection.size());
      for (const auto& p : plan.projection) {
        std::size_t col = column_of(p.kind == Projection::Kind::builtin ? p.alias : p.var);
        out_row.push_back(row[col]);
      }
      table.rows.push_back(std::move(out_row));
    }
  }

  if (!plan.order_by.empty()) {
    std::vector<std::size_t> key_cols;
    std::vector<bool> desc;
    for (const auto& key : plan.order_by) {
      for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (table.header[i] == key.column) {
          key_cols.push_back(i);
          desc.push_back(key.descending);
          break;
        }
      }
    }
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [&](const std::vector<Term>& a, const std::vector<Term>& b) {
                       for (std::size_t k = 0; k < key_cols.size(); ++k) {
                         int cmp = compare_terms(a[key_cols[k]], b[key_cols[k]]);
                         if (cmp != 0) return desc[k] ? cmp > 0 : cmp < 0;
                       }
                       for (std::size_t c = 0; c < a.size(); ++c) {
                         int cmp = compare_terms(a[c], b[c]);
                         if (cmp != 0) return cmp < 0;
                       }
                       return false;
                     });
  }

  if (plan.limit && table.rows.size() > *plan.limit) table.rows.resize(*plan.limit);
  return table;
}

std::string render_solutions_csv(const SolutionTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_escape(table.header[i]);
  }
  out.push_back('\n');
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      out += csv_escape(row[i].text);
    }
    out.push_back('\n');
  }
  return out;
}

std::string render_solutions_json(const SolutionTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Term& t = row[i];
      if (!t.is_iri() && t.datatype == Datatype::integer) {
        std::int64_t v = 0;
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (res.ec == std::errc() && res.ptr == t.text.data() + t.text.size()) {
          obj[table.header[i]] = v;
          continue;
        }
      }
      obj[table.header[i]] = t.text;
    }
    rows.push_back(std::move(obj));
  }
  return rows.dump(2) + "\n";
}

}  // namespace procgraph
