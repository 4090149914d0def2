#ifndef PROCGRAPH_RDF_HPP
#define PROCGRAPH_RDF_HPP

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace procgraph {

// Supported literal datatypes (XML Schema).
enum class Datatype : std::uint8_t { string, integer, decimal, date };

std::string_view datatype_iri(Datatype dt);
std::optional<Datatype> datatype_from_iri(std::string_view iri);

inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";

// An RDF term: an absolute IRI or a typed literal.
struct Term {
  enum class Kind : std::uint8_t { iri, literal };

  Kind kind = Kind::iri;
  std::string text;  // IRI text, or literal lexical form
  Datatype datatype = Datatype::string;

  static Term make_iri(std::string iri);
  static Term make_literal(std::string lexical, Datatype dt);
  static Term string_literal(std::string lexical);
  static Term integer_literal(std::int64_t value);
  static Term decimal_literal(std::string lexical);
  static Term date_literal(std::string iso);

  bool is_iri() const { return kind == Kind::iri; }
  bool is_literal() const { return kind == Kind::literal; }

  bool operator==(const Term&) const = default;
  auto operator<=>(const Term&) const = default;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept {
    std::size_t h = std::hash<std::string>{}(t.text);
    h ^= (static_cast<std::size_t>(t.kind) * 0x9E3779B97F4A7C15ull) +
         (static_cast<std::size_t>(t.datatype) << 8);
    return h;
  }
};

// Throws Errc::invalid_iri / invalid_term when a term breaks its invariants.
void check_term(const Term& term);
bool is_valid_iri(std::string_view iri);

struct Triple {
  Term subject;    // iri
  Term predicate;  // iri
  Term object;     // iri or literal

  bool operator==(const Triple&) const = default;
  auto operator<=>(const Triple&) const = default;
};

// A triple pattern position: a concrete term or a wildcard.
using PatternTerm = std::optional<Term>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;
};

// Indexed triple set with set semantics. Three full orderings (subject-,
// predicate- and object-first) back match(); every bound-position
// combination resolves to one contiguous index range, so a lookup never
// touches triples outside its bound key.
class Graph {
 public:
  Graph() = default;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;
  Graph(const Graph&);
  Graph& operator=(const Graph&);

  // Returns the new size; no-op when the triple is already present.
  std::size_t insert(const Triple& triple);
  std::size_t size() const { return spo_.size(); }
  bool empty() const { return spo_.empty(); }
  bool contains(const Triple& triple) const;

  // After freeze() the graph is read-only for any number of readers.
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  std::vector<Triple> match(const TriplePattern& pattern) const;
  void for_each_match(const TriplePattern& pattern,
                      const std::function<void(const Triple&)>& fn) const;

  std::vector<Triple> all_triples() const;

  // Instrumentation: number of index entries inspected by match calls.
  std::uint64_t inspected_count() const { return inspected_.load(std::memory_order_relaxed); }
  void reset_inspected_count() const { inspected_.store(0, std::memory_order_relaxed); }

  bool operator==(const Graph& other) const;

 private:
  using TermId = std::uint32_t;
  using Key = std::array<TermId, 3>;

  TermId intern(const Term& term);
  std::optional<TermId> lookup(const Term& term) const;
  Triple materialize(const Key& spo) const;

  std::vector<Term> terms_;
  std::unordered_map<Term, TermId, TermHash> term_ids_;
  std::set<Key> spo_;  // (s, p, o)
  std::set<Key> pos_;  // (p, o, s)
  std::set<Key> osp_;  // (o, s, p)
  bool frozen_ = false;
  mutable std::atomic<std::uint64_t> inspected_{0};
};

// Canonical N-Triples: one line per triple, sorted lexicographically,
// LF-terminated. Equal graphs serialize byte-identically.
std::string serialize_ntriples(const Graph& graph);
Graph parse_ntriples(std::string_view text);

std::string ntriples_render(const Triple& triple);
std::string ntriples_render_term(const Term& term);

}  // namespace procgraph

#endif  // PROCGRAPH_RDF_HPP
