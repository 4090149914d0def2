#include <algorithm>
#include <cctype>
#include <set>

#include "procgraph/decimal.hpp"
#include "procgraph/text.hpp"
#include "procgraph/errors.hpp"
#include "procgraph/query.hpp"

namespace procgraph {

namespace {

enum class Tok : std::uint8_t {
  iriref, pname, var, string, integer, decimal, ident, punct, eof
};

struct Token {
  Tok kind = Tok::eof;
  std::string text;   // decoded content; pname prefix part
  std::string local;  // pname local part
  int line = 1;
  int col = 1;
  std::size_t begin = 0;  // byte offsets into the source
  std::size_t end = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool pname_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::eof) break;
    }
    return out;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  [[noreturn]] void error(const std::string& msg) const {
    fail(Errc::query_syntax,
         "line " + std::to_string(line_) + ", column " + std::to_string(col_) + ": " + msg);
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = peek();
      if (c == '#') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  Token start_token(Tok kind) const {
    Token t;
    t.kind = kind;
    t.line = line_;
    t.col = col_;
    t.begin = pos_;
    return t;
  }

  Token next() {
    if (pos_ >= src_.size()) {
      Token t = start_token(Tok::eof);
      t.end = pos_;
      return t;
    }
    char c = peek();
    // '<' opens an IRI only when a '>' closes it before any whitespace;
    // otherwise it is the comparison operator.
    if (c == '<') return looks_like_iriref() ? lex_iriref() : lex_punct();
    if (c == '?') return lex_var();
    if (c == '"') return lex_string();
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '+' || c == '-') && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return lex_number();
    }
    if (ident_start(c) || c == ':') return lex_name();
    return lex_punct();
  }

  bool looks_like_iriref() const {
    for (std::size_t i = pos_ + 1; i < src_.size(); ++i) {
      if (src_[i] == '>') return true;
      if (std::isspace(static_cast<unsigned char>(src_[i]))) return false;
    }
    return false;
  }

  Token lex_iriref() {
    Token t = start_token(Tok::iriref);
    advance();  // <
    std::string iri;
    while (pos_ < src_.size() && peek() != '>') {
      char c = advance();
      if (c == '\n') error("newline inside IRI");
      iri.push_back(c);
    }
    if (pos_ >= src_.size()) error("unterminated IRI");
    advance();  // >
    if (!is_valid_iri(iri)) error("invalid IRI <" + iri + ">");
    t.text = std::move(iri);
    t.end = pos_;
    return t;
  }

  Token lex_var() {
    Token t = start_token(Tok::var);
    advance();  // ?
    if (!ident_start(peek())) error("variable name expected after '?'");
    std::string name;
    while (ident_char(peek())) name.push_back(advance());
    t.text = std::move(name);
    t.end = pos_;
    return t;
  }

  Token lex_string() {
    Token t = start_token(Tok::string);
    advance();  // "
    std::string value;
    for (;;) {
      if (pos_ >= src_.size()) error("unterminated string literal");
      char c = advance();
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= src_.size()) error("unterminated escape");
        char e = advance();
        switch (e) {
          case 't': value.push_back('\t'); break;
          case 'n': value.push_back('\n'); break;
          case 'r': value.push_back('\r'); break;
          case '"': value.push_back('"'); break;
          case '\\': value.push_back('\\'); break;
          default: error(std::string("unsupported escape \\") + e);
        }
      } else {
        value.push_back(c);
      }
    }
    t.text = std::move(value);
    t.end = pos_;
    return t;
  }

  Token lex_number() {
    Token t = start_token(Tok::integer);
    std::string text;
    if (peek() == '+' || peek() == '-') text.push_back(advance());
    while (std::isdigit(static_cast<unsigned char>(peek()))) text.push_back(advance());
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      t.kind = Tok::decimal;
      text.push_back(advance());
      while (std::isdigit(static_cast<unsigned char>(peek()))) text.push_back(advance());
    }
    t.text = std::move(text);
    t.end = pos_;
    return t;
  }

  Token lex_name() {
    Token t = start_token(Tok::ident);
    std::string name;
    while (ident_char(peek())) name.push_back(advance());
    if (peek() == ':') {
      advance();
      t.kind = Tok::pname;
      t.text = std::move(name);  // prefix, possibly empty
      std::string local;
      while (pname_char(peek())) local.push_back(advance());
      t.local = std::move(local);
    } else {
      if (name.empty()) error("unexpected ':'");
      t.text = std::move(name);
    }
    t.end = pos_;
    return t;
  }

  Token lex_punct() {
    Token t = start_token(Tok::punct);
    char c = advance();
    std::string text(1, c);
    if (c == '^' && peek() == '^') {
      advance();
      text = "^^";
    } else if ((c == '<' || c == '>' || c == '!') && peek() == '=') {
      advance();
      text.push_back('=');
    } else if (!(c == '{' || c == '}' || c == '(' || c == ')' || c == '.' || c == ',' ||
                 c == '*' || c == '=' || c == '<' || c == '>')) {
      error(std::string("unexpected character '") + c + "'");
    }
    t.text = std::move(text);
    t.end = pos_;
    return t;
  }
};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, std::vector<Token> tokens)
      : src_(src), tokens_(std::move(tokens)) {}

  QueryPlan run() {
    parse_prologue();
    parse_select();
    parse_where();
    parse_modifiers();
    expect_eof();
    check_plan();
    return std::move(plan_);
  }

 private:
  std::string_view src_;
  std::vector<Token> tokens_;
  std::size_t idx_ = 0;
  QueryPlan plan_;

  const Token& cur() const { return tokens_[idx_]; }
  const Token& take() { return tokens_[idx_++]; }

  [[noreturn]] void error_at(const Token& t, const std::string& msg) const {
    fail(Errc::query_syntax,
         "line " + std::to_string(t.line) + ", column " + std::to_string(t.col) + ": " + msg);
  }

  bool is_kw(const Token& t, std::string_view kw) const {
    return t.kind == Tok::ident && upper(t.text) == kw;
  }

  bool is_punct(const Token& t, std::string_view p) const {
    return t.kind == Tok::punct && t.text == p;
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(cur(), p)) error_at(cur(), "expected '" + std::string(p) + "'");
    take();
  }

  std::string expect_var() {
    if (cur().kind != Tok::var) error_at(cur(), "expected a ?variable");
    return take().text;
  }

  void expect_eof() {
    if (cur().kind != Tok::eof) error_at(cur(), "unexpected trailing input");
  }

  std::string resolve_pname(const Token& t) const {
    auto it = plan_.prefixes.find(t.text);
    if (it == plan_.prefixes.end()) {
      fail(Errc::unknown_prefix, "line " + std::to_string(t.line) + ", column " +
                                     std::to_string(t.col) + ": unknown prefix '" + t.text + ":'");
    }
    std::string iri = it->second + t.local;
    if (!is_valid_iri(iri)) error_at(t, "prefixed name expands to invalid IRI " + iri);
    return iri;
  }

  void parse_prologue() {
    while (is_kw(cur(), "PREFIX")) {
      take();
      if (cur().kind != Tok::pname || !cur().local.empty()) {
        error_at(cur(), "expected a prefix name like 'ex:'");
      }
      std::string name = take().text;
      if (cur().kind != Tok::iriref) error_at(cur(), "expected an <IRI> after the prefix name");
      plan_.prefixes[name] = take().text;
    }
  }

  std::optional<BuiltinFn> builtin_by_name(const Token& t) const {
    if (t.kind != Tok::ident) return std::nullopt;
    std::string u = upper(t.text);
    if (u == "YEAR") return BuiltinFn::year;
    if (u == "MONTH") return BuiltinFn::month;
    if (u == "QUARTER") return BuiltinFn::quarter;
    return std::nullopt;
  }

  std::optional<AggregateFn> aggregate_by_name(const Token& t) const {
    if (t.kind != Tok::ident) return std::nullopt;
    std::string u = upper(t.text);
    if (u == "COUNT") return AggregateFn::count;
    if (u == "SUM") return AggregateFn::sum;
    if (u == "AVG") return AggregateFn::avg;
    if (u == "MIN") return AggregateFn::min;
    if (u == "MAX") return AggregateFn::max;
    if (u == "MEDIAN") return AggregateFn::median;
    if (u == "STDDEV") return AggregateFn::stddev;
    return std::nullopt;
  }

  void parse_select() {
    if (!is_kw(cur(), "SELECT")) error_at(cur(), "expected SELECT");
    take();
    while (!is_kw(cur(), "WHERE")) {
      if (cur().kind == Tok::var) {
        Projection p;
        p.kind = Projection::Kind::variable;
        p.var = take().text;
        p.alias = p.var;
        plan_.projection.push_back(std::move(p));
      } else if (is_punct(cur(), "(")) {
        take();
        Projection p = parse_projection_expr();
        if (!is_kw(cur(), "AS")) error_at(cur(), "expected AS in projection");
        take();
        p.alias = expect_var();
        expect_punct(")");
        plan_.projection.push_back(std::move(p));
      } else {
        error_at(cur(), "expected a ?variable or (expression AS ?alias) in SELECT");
      }
    }
    if (plan_.projection.empty()) error_at(cur(), "SELECT needs at least one column");
    take();  // WHERE
  }

  Projection parse_projection_expr() {
    Projection p;
    if (auto agg = aggregate_by_name(cur())) {
      const Token& name = take();
      p.kind = Projection::Kind::aggregate;
      p.agg = *agg;
      expect_punct("(");
      if (is_kw(cur(), "DISTINCT")) {
        if (p.agg != AggregateFn::count) {
          error_at(cur(), "DISTINCT is only supported inside COUNT");
        }
        take();
        p.distinct = true;
      }
      if (is_punct(cur(), "*")) {
        if (p.agg != AggregateFn::count) error_at(cur(), "* is only supported inside COUNT");
        if (p.distinct) error_at(cur(), "COUNT(DISTINCT *) is not supported");
        take();
        p.count_star = true;
      } else {
        p.var = expect_var();
      }
      expect_punct(")");
      (void)name;
      return p;
    }
    if (auto fn = builtin_by_name(cur())) {
      take();
      p.kind = Projection::Kind::builtin;
      p.fn = *fn;
      expect_punct("(");
      p.var = expect_var();
      expect_punct(")");
      return p;
    }
    error_at(cur(), "expected an aggregate or YEAR/MONTH/QUARTER in projection");
  }

  Term parse_literal_term() {
    if (cur().kind == Tok::integer) return Term::integer_literal(std::stoll(take().text));
    if (cur().kind == Tok::decimal) {
      const Token& t = take();
      auto d = Decimal::parse(t.text);
      if (!d) error_at(t, "bad decimal literal " + t.text);
      return Term::decimal_literal(d->str());
    }
    if (cur().kind == Tok::string) {
      Token lit = take();
      if (is_punct(cur(), "^^")) {
        take();
        std::string dt_iri;
        if (cur().kind == Tok::iriref) {
          dt_iri = take().text;
        } else if (cur().kind == Tok::pname) {
          dt_iri = resolve_pname(take());
        } else {
          error_at(cur(), "expected a datatype IRI after ^^");
        }
        auto dt = datatype_from_iri(dt_iri);
        if (!dt) error_at(lit, "unsupported literal datatype <" + dt_iri + ">");
        return Term::make_literal(lit.text, *dt);
      }
      return Term::string_literal(lit.text);
    }
    error_at(cur(), "expected a literal");
  }

  PatternSlot parse_slot(bool predicate_position, bool object_position) {
    if (cur().kind == Tok::var) return PatternSlot::variable(take().text);
    if (cur().kind == Tok::iriref) return PatternSlot::constant(Term::make_iri(take().text));
    if (cur().kind == Tok::pname) {
      const Token t = take();
      return PatternSlot::constant(Term::make_iri(resolve_pname(t)));
    }
    if (predicate_position && cur().kind == Tok::ident && cur().text == "a") {
      take();
      return PatternSlot::constant(Term::make_iri(std::string(kRdfType)));
    }
    if (object_position) return PatternSlot::constant(parse_literal_term());
    error_at(cur(), predicate_position ? "expected a predicate" : "expected an IRI or ?variable");
  }

  void parse_where() {
    expect_punct("{");
    while (!is_punct(cur(), "}")) {
      if (cur().kind == Tok::eof) error_at(cur(), "unterminated WHERE block");
      if (is_kw(cur(), "FILTER")) {
        take();
        parse_filter();
        continue;
      }
      QueryTriple t;
      t.subject = parse_slot(false, false);
      t.predicate = parse_slot(true, false);
      t.object = parse_slot(false, true);
      plan_.patterns.push_back(std::move(t));
      if (is_punct(cur(), ".")) take();
    }
    take();  // }
  }

  FilterOperand parse_operand() {
    FilterOperand op;
    if (cur().kind == Tok::var) {
      op.kind = FilterOperand::Kind::variable;
      op.var = take().text;
      return op;
    }
    if (auto fn = builtin_by_name(cur())) {
      // Only treat as builtin when a '(' follows; bare idents are errors anyway.
      take();
      op.kind = FilterOperand::Kind::builtin;
      op.fn = *fn;
      expect_punct("(");
      op.var = expect_var();
      expect_punct(")");
      return op;
    }
    op.kind = FilterOperand::Kind::constant;
    op.constant = parse_literal_term();
    return op;
  }

  void parse_filter() {
    const Token& open = cur();
    expect_punct("(");
    std::size_t body_begin = open.end;
    Filter f;
    f.lhs = parse_operand();
    const Token& op_tok = cur();
    if (op_tok.kind != Tok::punct) error_at(op_tok, "expected a comparison operator");
    std::string op = take().text;
    if (op == "=") f.op = CompareOp::eq;
    else if (op == "!=") f.op = CompareOp::ne;
    else if (op == "<") f.op = CompareOp::lt;
    else if (op == "<=") f.op = CompareOp::le;
    else if (op == ">") f.op = CompareOp::gt;
    else if (op == ">=") f.op = CompareOp::ge;
    else error_at(op_tok, "expected a comparison operator, got '" + op + "'");
    f.rhs = parse_operand();
    const Token& close = cur();
    expect_punct(")");
    f.text = std::string(trim(src_.substr(body_begin, close.begin - body_begin)));
    plan_.filters.push_back(std::move(f));
  }

  void parse_modifiers() {
    if (is_kw(cur(), "GROUP")) {
      take();
      if (!is_kw(cur(), "BY")) error_at(cur(), "expected BY after GROUP");
      take();
      while (cur().kind == Tok::var) plan_.group_by.push_back(take().text);
      if (plan_.group_by.empty()) error_at(cur(), "GROUP BY needs at least one variable");
    }
    if (is_kw(cur(), "ORDER")) {
      take();
      if (!is_kw(cur(), "BY")) error_at(cur(), "expected BY after ORDER");
      take();
      bool any = false;
      for (;;) {
        OrderKey key;
        if (is_kw(cur(), "ASC") || is_kw(cur(), "DESC")) {
          key.descending = upper(take().text) == "DESC";
          expect_punct("(");
          key.column = expect_var();
          expect_punct(")");
        } else if (cur().kind == Tok::var) {
          key.column = take().text;
        } else {
          break;
        }
        plan_.order_by.push_back(std::move(key));
        any = true;
      }
      if (!any) error_at(cur(), "ORDER BY needs at least one key");
    }
    if (is_kw(cur(), "LIMIT")) {
      take();
      if (cur().kind != Tok::integer) error_at(cur(), "LIMIT needs a non-negative integer");
      long long n = std::stoll(take().text);
      if (n < 0) error_at(tokens_[idx_ - 1], "LIMIT needs a non-negative integer");
      plan_.limit = static_cast<std::size_t>(n);
    }
  }

  void check_plan() {
    std::set<std::string> pattern_vars;
    for (const auto& p : plan_.patterns) {
      for (const PatternSlot* s : {&p.subject, &p.predicate, &p.object}) {
        if (s->is_var) pattern_vars.insert(s->var);
      }
    }

    std::set<std::string> aliases;  // output column names
    std::set<std::string> builtin_aliases;
    for (const auto& p : plan_.projection) {
      if (!aliases.insert(p.alias).second) {
        fail(Errc::query_syntax, "duplicate output column ?" + p.alias);
      }
      if (p.kind == Projection::Kind::builtin) builtin_aliases.insert(p.alias);
      if (p.kind == Projection::Kind::variable) {
        if (!pattern_vars.count(p.var)) {
          fail(Errc::query_syntax, "projected ?" + p.var + " is not bound by any pattern");
        }
      } else if (!p.count_star && !pattern_vars.count(p.var)) {
        fail(Errc::query_syntax, "?" + p.var + " is not bound by any pattern");
      }
    }

    for (const auto& g : plan_.group_by) {
      if (!pattern_vars.count(g) && !builtin_aliases.count(g)) {
        fail(Errc::query_syntax, "GROUP BY ?" + g + " is neither a pattern variable nor an alias");
      }
    }

    if (plan_.grouped()) {
      auto grouped_ok = [&](const std::string& name) {
        return std::find(plan_.group_by.begin(), plan_.group_by.end(), name) !=
               plan_.group_by.end();
      };
      for (const auto& p : plan_.projection) {
        if (p.kind == Projection::Kind::variable && !grouped_ok(p.var)) {
          fail(Errc::ungrouped_variable,
               "?" + p.var + " is projected but not in GROUP BY and not aggregated");
        }
        if (p.kind == Projection::Kind::builtin && !grouped_ok(p.alias)) {
          fail(Errc::ungrouped_variable,
               "?" + p.alias + " is projected but not in GROUP BY and not aggregated");
        }
      }
    }

    for (const auto& f : plan_.filters) {
      for (const FilterOperand* op : {&f.lhs, &f.rhs}) {
        if (op->kind != FilterOperand::Kind::constant && !pattern_vars.count(op->var)) {
          fail(Errc::unbound_filter_variable,
               "filter variable ?" + op->var + " does not appear in any pattern");
        }
      }
    }

    for (const auto& key : plan_.order_by) {
      if (!aliases.count(key.column)) {
        fail(Errc::query_syntax, "ORDER BY ?" + key.column + " is not an output column");
      }
    }
  }
};

}  // namespace

PatternSlot PatternSlot::variable(std::string name) {
  PatternSlot s;
  s.is_var = true;
  s.var = std::move(name);
  return s;
}

PatternSlot PatternSlot::constant(Term t) {
  PatternSlot s;
  s.is_var = false;
  s.term = std::move(t);
  return s;
}

bool QueryPlan::has_aggregate() const {
  for (const auto& p : projection) {
    if (p.kind == Projection::Kind::aggregate) return true;
  }
  return false;
}

std::string_view builtin_fn_name(BuiltinFn fn) {
  switch (fn) {
    case BuiltinFn::year:
      return "YEAR";
    case BuiltinFn::month:
      return "MONTH";
    case BuiltinFn::quarter:
      return "QUARTER";
  }
  return "";
}

std::string_view aggregate_fn_name(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::count:
      return "COUNT";
    case AggregateFn::sum:
      return "SUM";
    case AggregateFn::avg:
      return "AVG";
    case AggregateFn::min:
      return "MIN";
    case AggregateFn::max:
      return "MAX";
    case AggregateFn::median:
      return "MEDIAN";
    case AggregateFn::stddev:
      return "STDDEV";
  }
  return "";
}

QueryPlan parse_query(std::string_view text) {
  Lexer lexer(text);
  Parser parser(text, lexer.run());
  return parser.run();
}

}  // namespace procgraph
