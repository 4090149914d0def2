// Times the parallel kernels against their serial references on a synthetic
// corpus and checks that both produce identical results.

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "procgraph/estimator.hpp"
#include "procgraph/ingest.hpp"
#include "procgraph/mapping.hpp"
#include "procgraph/pipeline.hpp"
#include "procgraph/rdf.hpp"
#include "procgraph/shapes.hpp"

using namespace procgraph;

namespace {

const char* kWords[] = {"diesel", "fuel", "medical", "gloves", "road", "maintenance",
                        "office", "furniture", "heating", "oil", "transport", "software",
                        "licenses", "construction", "works", "electricity", "supply"};

RecordTable synth_table(std::size_t rows) {
  RecordTable t;
  t.columns = kCanonicalColumns;
  std::uint64_t s = 99;
  auto next = [&s]() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return s >> 33;
  };
  for (std::size_t i = 0; i < rows; ++i) {
    std::string subject;
    for (int w = 0; w < 3; ++w) {
      if (w) subject += ' ';
      subject += kWords[next() % (sizeof(kWords) / sizeof(kWords[0]))];
    }
    std::string authority = "Institution " + std::to_string(next() % 50);
    std::string supplier = "Supplier " + std::to_string(next() % 200);
    int year = 2019 + static_cast<int>(next() % 3);
    int month = 1 + static_cast<int>(next() % 12);
    int day = 1 + static_cast<int>(next() % 28);
    char date[16];
    std::snprintf(date, sizeof(date), "%04d-%02d-%02d", year, month, day);
    std::string amount = std::to_string(100000 + next() % 9000000);
    t.cells.push_back({authority, subject, supplier, date, amount});
    t.meta.push_back({"bench-" + std::to_string(i + 1), "bench.csv", {}});
  }
  return t;
}

struct Timing {
  double serial = 0.0;
  double parallel = 0.0;
  bool equal = false;
};

void print_row(const char* name, const Timing& t) {
  double speedup = t.parallel > 0.0 ? t.serial / t.parallel : 0.0;
  std::printf("%-12s %10.3fs %10.3fs %8.2fx   %s\n", name, t.serial, t.parallel, speedup,
              t.equal ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t rows = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
  if (argc > 2) omp_set_num_threads(std::atoi(argv[2]));

  std::printf("rows: %zu, threads: %d\n", rows, omp_get_max_threads());
  std::printf("%-12s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

  RecordTable table = synth_table(rows);
  MappingSpec spec = default_mapping(kDefaultBaseIri);

  Timing map_t;
  double t0 = omp_get_wtime();
  MappingResult serial_map = execute_mapping_serial(table, spec);
  double t1 = omp_get_wtime();
  MappingResult parallel_map = execute_mapping(table, spec);
  double t2 = omp_get_wtime();
  map_t.serial = t1 - t0;
  map_t.parallel = t2 - t1;
  map_t.equal = serialize_ntriples(serial_map.graph) == serialize_ntriples(parallel_map.graph);
  print_row("mapping", map_t);

  parallel_map.graph.freeze();
  ShapeSet shapes = builtin_shapes(spec.vocabulary());
  Timing val_t;
  t0 = omp_get_wtime();
  ValidationReport serial_report = validate_serial(parallel_map.graph, shapes);
  t1 = omp_get_wtime();
  ValidationReport parallel_report = validate(parallel_map.graph, shapes);
  t2 = omp_get_wtime();
  val_t.serial = t1 - t0;
  val_t.parallel = t2 - t1;
  val_t.equal = render_report_json(serial_report) == render_report_json(parallel_report);
  print_row("validation", val_t);

  std::vector<ContractRecord> records = to_records(table);
  VectorIndex index = build_index(records);
  EmbeddingVector query = embed_ngram("diesel fuel transport", index.dimension, index.embed_seed);
  Timing knn_t;
  int reps = 50;
  t0 = omp_get_wtime();
  std::vector<Neighbor> serial_nb;
  for (int r = 0; r < reps; ++r) serial_nb = knn_serial(index, query, kDefaultK);
  t1 = omp_get_wtime();
  std::vector<Neighbor> parallel_nb;
  for (int r = 0; r < reps; ++r) parallel_nb = knn(index, query, kDefaultK);
  t2 = omp_get_wtime();
  knn_t.serial = t1 - t0;
  knn_t.parallel = t2 - t1;
  knn_t.equal = serial_nb.size() == parallel_nb.size();
  for (std::size_t i = 0; knn_t.equal && i < serial_nb.size(); ++i) {
    knn_t.equal = serial_nb[i].record_id == parallel_nb[i].record_id &&
                  serial_nb[i].similarity == parallel_nb[i].similarity;
  }
  print_row("knn", knn_t);

  Timing eval_t;
  t0 = omp_get_wtime();
  EvalResult serial_eval = evaluate_estimator_serial(records, 0.2, 17);
  t1 = omp_get_wtime();
  EvalResult parallel_eval = evaluate_estimator(records, 0.2, 17);
  t2 = omp_get_wtime();
  eval_t.serial = t1 - t0;
  eval_t.parallel = t2 - t1;
  eval_t.equal = render_metrics_json(serial_eval) == render_metrics_json(parallel_eval);
  print_row("evaluate", eval_t);

  bool all = map_t.equal && val_t.equal && knn_t.equal && eval_t.equal;
  return all ? 0 : 1;
}
