#ifndef TESTS_FIXTURES_HPP
#define TESTS_FIXTURES_HPP

#include <omp.h>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "procgraph/ingest.hpp"
#include "procgraph/mapping.hpp"
#include "procgraph/rdf.hpp"

namespace fixtures {

// The sandbox may report one core; the parallel kernels still need to prove
// they agree with the serial references under real thread counts.
struct ThreadSetup {
  ThreadSetup() { omp_set_num_threads(4); }
};
inline ThreadSetup thread_setup;

inline const char* kSubjectWords[] = {
    "diesel", "fuel",     "medical", "gloves",   "road",        "maintenance",
    "office", "furniture", "heating", "oil",      "transport",   "software",
    "school", "textbooks", "vaccine", "delivery", "construction"};

// Normalized five-column table with exactly the requested entity counts
// (requires contracts >= institutions and contracts >= suppliers).
inline procgraph::RecordTable synth_table(std::size_t contracts, std::size_t institutions,
                                          std::size_t suppliers, std::uint64_t seed = 7) {
  procgraph::RecordTable t;
  t.columns = procgraph::kCanonicalColumns;
  std::mt19937_64 rng(seed);
  constexpr std::size_t kWordCount = sizeof(kSubjectWords) / sizeof(kSubjectWords[0]);
  for (std::size_t i = 0; i < contracts; ++i) {
    std::string subject;
    for (int w = 0; w < 3; ++w) {
      if (w) subject += ' ';
      subject += kSubjectWords[rng() % kWordCount];
    }
    std::string authority = "Institution " + std::to_string(i % institutions);
    std::string supplier = "Supplier " + std::to_string(i % suppliers);
    int year = 2019 + static_cast<int>(rng() % 3);
    int month = 1 + static_cast<int>(rng() % 12);
    int day = 1 + static_cast<int>(rng() % 28);
    char date[16];
    std::snprintf(date, sizeof(date), "%04d-%02d-%02d", year, month, day);
    std::string amount = std::to_string(10000 + rng() % 99000000);
    t.cells.push_back({authority, subject, supplier, date, amount});
    t.meta.push_back({"fix-" + std::to_string(i + 1), "fixture.csv", {}});
  }
  return t;
}

inline std::vector<procgraph::ContractRecord> synth_records(std::size_t n,
                                                            std::uint64_t seed = 7) {
  return procgraph::to_records(synth_table(n, std::max<std::size_t>(1, n / 6),
                                           std::max<std::size_t>(1, n / 3), seed));
}

// Copy of a graph minus the triples the filter selects.
template <typename Fn>
procgraph::Graph rebuild_without(const procgraph::Graph& g, Fn drop) {
  procgraph::Graph out;
  for (const auto& t : g.all_triples()) {
    if (!drop(t)) out.insert(t);
  }
  return out;
}

// Copy of a graph with one triple swapped for another.
inline procgraph::Graph rebuild_replacing(const procgraph::Graph& g,
                                          const procgraph::Triple& before,
                                          const procgraph::Triple& after) {
  procgraph::Graph out;
  for (const auto& t : g.all_triples()) {
    out.insert(t == before ? after : t);
  }
  return out;
}

inline procgraph::MappingSpec sample_spec() {
  return procgraph::default_mapping("https://procurement.example.org/");
}

// Mapped + frozen graph over a synthetic table.
inline procgraph::Graph sample_graph(std::size_t contracts = 50, std::size_t institutions = 8,
                                     std::size_t suppliers = 20, std::uint64_t seed = 7) {
  auto table = synth_table(contracts, institutions, suppliers, seed);
  auto result = procgraph::execute_mapping(table, sample_spec());
  result.graph.freeze();
  return std::move(result.graph);
}

}  // namespace fixtures

#endif  // TESTS_FIXTURES_HPP
