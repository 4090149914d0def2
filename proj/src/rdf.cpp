#include "procgraph/rdf.hpp"

#include <algorithm>
#include <limits>

#include "procgraph/errors.hpp"

namespace procgraph {

namespace {

constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

}  // namespace

std::string_view datatype_iri(Datatype dt) {
  switch (dt) {
    case Datatype::string:
      return "http://www.w3.org/2001/XMLSchema#string";
    case Datatype::integer:
      return "http://www.w3.org/2001/XMLSchema#integer";
    case Datatype::decimal:
      return "http://www.w3.org/2001/XMLSchema#decimal";
    case Datatype::date:
      return "http://www.w3.org/2001/XMLSchema#date";
  }
  return "";
}

std::optional<Datatype> datatype_from_iri(std::string_view iri) {
  if (iri.substr(0, kXsd.size()) != kXsd) return std::nullopt;
  std::string_view local = iri.substr(kXsd.size());
  if (local == "string") return Datatype::string;
  if (local == "integer") return Datatype::integer;
  if (local == "decimal") return Datatype::decimal;
  if (local == "date") return Datatype::date;
  return std::nullopt;
}

Term Term::make_iri(std::string iri) {
  Term t;
  t.kind = Kind::iri;
  t.text = std::move(iri);
  return t;
}

Term Term::make_literal(std::string lexical, Datatype dt) {
  Term t;
  t.kind = Kind::literal;
  t.text = std::move(lexical);
  t.datatype = dt;
  return t;
}

Term Term::string_literal(std::string lexical) {
  return make_literal(std::move(lexical), Datatype::string);
}

Term Term::integer_literal(std::int64_t value) {
  return make_literal(std::to_string(value), Datatype::integer);
}

Term Term::decimal_literal(std::string lexical) {
  return make_literal(std::move(lexical), Datatype::decimal);
}

Term Term::date_literal(std::string iso) { return make_literal(std::move(iso), Datatype::date); }

bool is_valid_iri(std::string_view iri) {
  // Absolute: a scheme followed by ':'.
  std::size_t colon = iri.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  char first = iri[0];
  if (!((first >= 'a' && first <= 'z') || (first >= 'A' && first <= 'Z'))) return false;
  for (std::size_t i = 1; i < colon; ++i) {
    char c = iri[i];
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '+' || c == '-' || c == '.';
    if (!ok) return false;
  }
  // No unescaped whitespace or control characters, and none of <>"{}|^`\.
  for (char c : iri) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u <= 0x20) return false;
    if (c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' ||
        c == '`' || c == '\\') {
      return false;
    }
  }
  return true;
}

void check_term(const Term& term) {
  if (term.is_iri()) {
    if (!is_valid_iri(term.text)) fail(Errc::invalid_iri, "invalid IRI: " + term.text);
  }
}

Graph::Graph(const Graph& other)
    : terms_(other.terms_),
      term_ids_(other.term_ids_),
      spo_(other.spo_),
      pos_(other.pos_),
      osp_(other.osp_),
      frozen_(other.frozen_),
      inspected_(other.inspected_.load(std::memory_order_relaxed)) {}

Graph& Graph::operator=(const Graph& other) {
  if (this == &other) return *this;
  terms_ = other.terms_;
  term_ids_ = other.term_ids_;
  spo_ = other.spo_;
  pos_ = other.pos_;
  osp_ = other.osp_;
  frozen_ = other.frozen_;
  inspected_.store(other.inspected_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  return *this;
}

Graph::TermId Graph::intern(const Term& term) {
  auto it = term_ids_.find(term);
  if (it != term_ids_.end()) return it->second;
  if (terms_.size() >= std::numeric_limits<TermId>::max()) {
    fail(Errc::overflow, "graph term table full");
  }
  TermId id = static_cast<TermId>(terms_.size());
  terms_.push_back(term);
  term_ids_.emplace(term, id);
  return id;
}

std::optional<Graph::TermId> Graph::lookup(const Term& term) const {
  auto it = term_ids_.find(term);
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t Graph::insert(const Triple& triple) {
  if (frozen_) fail(Errc::frozen_graph, "insert into a frozen graph");
  if (!triple.subject.is_iri()) {
    fail(Errc::literal_in_subject, "triple subject must be an IRI");
  }
  if (!triple.predicate.is_iri()) {
    fail(Errc::literal_in_subject, "triple predicate must be an IRI");
  }
  check_term(triple.subject);
  check_term(triple.predicate);
  check_term(triple.object);
  TermId s = intern(triple.subject);
  TermId p = intern(triple.predicate);
  TermId o = intern(triple.object);
  auto [it, inserted] = spo_.insert({s, p, o});
  if (inserted) {
    pos_.insert({p, o, s});
    osp_.insert({o, s, p});
  }
  return spo_.size();
}

bool Graph::contains(const Triple& triple) const {
  auto s = lookup(triple.subject);
  auto p = lookup(triple.predicate);
  auto o = lookup(triple.object);
  if (!s || !p || !o) return false;
  return spo_.count({*s, *p, *o}) > 0;
}

Triple Graph::materialize(const Key& spo) const {
  return Triple{terms_[spo[0]], terms_[spo[1]], terms_[spo[2]]};
}

void Graph::for_each_match(const TriplePattern& pattern,
                           const std::function<void(const Triple&)>& fn) const {
  constexpr TermId kMin = 0;
  constexpr TermId kMax = std::numeric_limits<TermId>::max();

  std::optional<TermId> s, p, o;
  if (pattern.subject) {
    s = lookup(*pattern.subject);
    if (!s) return;
  }
  if (pattern.predicate) {
    p = lookup(*pattern.predicate);
    if (!p) return;
  }
  if (pattern.object) {
    o = lookup(*pattern.object);
    if (!o) return;
  }

  // Pick the index whose ordering puts every bound position in the prefix:
  // every entry in the selected range is a match, so the inspection count
  // equals the result count.
  const std::set<Key>* index = &spo_;
  Key lo{kMin, kMin, kMin};
  Key hi{kMax, kMax, kMax};
  auto emit = [&](const Key& key, int a, int b, int c) {
    Triple t;
    t.subject = terms_[key[static_cast<std::size_t>(a)]];
    t.predicate = terms_[key[static_cast<std::size_t>(b)]];
    t.object = terms_[key[static_cast<std::size_t>(c)]];
    fn(t);
  };

  int layout = 0;  // 0: spo, 1: pos, 2: osp
  if (s && p && o) {
    index = &spo_;
    lo = hi = {*s, *p, *o};
    layout = 0;
  } else if (s && p) {
    index = &spo_;
    lo = {*s, *p, kMin};
    hi = {*s, *p, kMax};
    layout = 0;
  } else if (s && o) {
    index = &osp_;
    lo = {*o, *s, kMin};
    hi = {*o, *s, kMax};
    layout = 2;
  } else if (p && o) {
    index = &pos_;
    lo = {*p, *o, kMin};
    hi = {*p, *o, kMax};
    layout = 1;
  } else if (s) {
    index = &spo_;
    lo = {*s, kMin, kMin};
    hi = {*s, kMax, kMax};
    layout = 0;
  } else if (p) {
    index = &pos_;
    lo = {*p, kMin, kMin};
    hi = {*p, kMax, kMax};
    layout = 1;
  } else if (o) {
    index = &osp_;
    lo = {*o, kMin, kMin};
    hi = {*o, kMax, kMax};
    layout = 2;
  }

  auto begin = (s || p || o) ? index->lower_bound(lo) : index->begin();
  auto end = (s || p || o) ? index->upper_bound(hi) : index->end();
  std::uint64_t inspected = 0;
  for (auto it = begin; it != end; ++it) {
    ++inspected;
    switch (layout) {
      case 0:
        emit(*it, 0, 1, 2);
        break;
      case 1:
        emit(*it, 2, 0, 1);
        break;
      default:
        emit(*it, 1, 2, 0);
        break;
    }
  }
  inspected_.fetch_add(inspected, std::memory_order_relaxed);
}

std::vector<Triple> Graph::match(const TriplePattern& pattern) const {
  std::vector<Triple> out;
  for_each_match(pattern, [&](const Triple& t) { out.push_back(t); });
  return out;
}

std::vector<Triple> Graph::all_triples() const {
  std::vector<Triple> out;
  out.reserve(spo_.size());
  for (const auto& key : spo_) out.push_back(materialize(key));
  return out;
}

bool Graph::operator==(const Graph& other) const {
  if (size() != other.size()) return false;
  for (const auto& key : spo_) {
    if (!other.contains(materialize(key))) return false;
  }
  return true;
}

}  // namespace procgraph
