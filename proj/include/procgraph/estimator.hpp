#ifndef PROCGRAPH_ESTIMATOR_HPP
#define PROCGRAPH_ESTIMATOR_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "procgraph/ingest.hpp"

namespace procgraph {

inline constexpr std::size_t kDefaultEmbedDim = 256;
inline constexpr std::uint64_t kDefaultEmbedSeed = 17;
inline constexpr std::size_t kDefaultK = 9;

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dimension() const { return values.size(); }
};

// Hashed character 3-gram bag over lowercased codepoints, L2-normalized.
// Deterministic for fixed (text, dimension, seed). Texts shorter than three
// codepoints after trimming cannot be embedded.
EmbeddingVector embed_ngram(std::string_view text, std::size_t dimension,
                            std::uint64_t seed = kDefaultEmbedSeed);

struct IndexEntry {
  std::string record_id;
  EmbeddingVector vector;
  double norm = 0.0;
  std::int64_t amount = 0;  // denars
};

struct VectorIndex {
  std::size_t dimension = 0;
  std::uint64_t embed_seed = kDefaultEmbedSeed;
  std::vector<IndexEntry> entries;

  std::size_t size() const { return entries.size(); }
};

// Vector file: line 1 is the dimension, then `record_id<TAB>v1 v2 ... vD`
// per line. Every record_id must resolve through the amounts map.
VectorIndex load_vectors(const std::string& path,
                         const std::map<std::string, std::int64_t>& amounts);
VectorIndex load_vectors_text(std::string_view text,
                              const std::map<std::string, std::int64_t>& amounts);

// Embeds record descriptions with the built-in embedder. Records whose
// description is too short to embed are left out.
VectorIndex build_index(const std::vector<ContractRecord>& records,
                        std::size_t dimension = kDefaultEmbedDim,
                        std::uint64_t seed = kDefaultEmbedSeed);

struct Neighbor {
  std::string record_id;
  double similarity = 0.0;
};

// Exact top-min(k, size) by cosine similarity, ties by ascending record_id.
std::vector<Neighbor> knn(const VectorIndex& index, const EmbeddingVector& query,
                          std::size_t k);
std::vector<Neighbor> knn_serial(const VectorIndex& index, const EmbeddingVector& query,
                                 std::size_t k);

// Median amount of the k nearest neighbors, in whole denars; an even count
// takes the midpoint rounded half away from zero.
std::int64_t predict_amount(std::string_view description, const VectorIndex& index,
                            std::size_t k = kDefaultK);
std::int64_t predict_for_query(const VectorIndex& index, const EmbeddingVector& query,
                               std::size_t k = kDefaultK);

// Constant predictor: the train median in whole denars.
std::int64_t baseline_median(std::vector<std::int64_t> amounts);

struct Metrics {
  double rmse = 0.0;  // millions of denars
  double mae = 0.0;
  std::optional<double> r2;  // empty when the test amounts have no variance
  std::size_t n = 0;
};

// RMSE/MAE/R2 in the caller's unit; R2 left empty when truths have no
// variance.
Metrics compute_metrics(const std::vector<double>& predictions,
                        const std::vector<double>& truths);

struct EvalResult {
  Metrics knn;
  Metrics baseline;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

// Seeded shuffle, first round(n*split_fraction) records train, rest test;
// index built from train only; identical test rows for both predictors.
// Metrics are in millions of denars.
EvalResult evaluate_estimator(const std::vector<ContractRecord>& records,
                              double split_fraction, std::uint64_t seed,
                              std::size_t k = kDefaultK,
                              std::size_t dimension = kDefaultEmbedDim);
EvalResult evaluate_estimator_serial(const std::vector<ContractRecord>& records,
                                     double split_fraction, std::uint64_t seed,
                                     std::size_t k = kDefaultK,
                                     std::size_t dimension = kDefaultEmbedDim);

std::string render_metrics_csv(const EvalResult& result);
std::string render_metrics_json(const EvalResult& result);

}  // namespace procgraph

#endif  // PROCGRAPH_ESTIMATOR_HPP
