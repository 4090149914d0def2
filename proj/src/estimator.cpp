#include "procgraph/estimator.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>

#include "procgraph/errors.hpp"
#include "procgraph/text.hpp"

#include "json.hpp"

namespace procgraph {
namespace {

using json = nlohmann::json;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::uint64_t h, const char* data, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t seed_state(std::uint64_t seed) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
  return fnv1a(kFnvOffset, bytes, 8);
}

double vector_norm(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

// Dot product in fixed index order so the result is bitwise identical no
// matter which thread computes it.
double similarity(const IndexEntry& entry, const EmbeddingVector& query, double query_norm) {
  double dot = 0.0;
  for (std::size_t i = 0; i < query.values.size(); ++i) {
    dot += entry.vector.values[i] * query.values[i];
  }
  return dot / (entry.norm * query_norm);
}

std::vector<std::size_t> top_entries(const VectorIndex& index, const std::vector<double>& sims,
                                     std::size_t k) {
  std::vector<std::size_t> order(index.entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return index.entries[a].record_id < index.entries[b].record_id;
  });
  order.resize(std::min(k, order.size()));
  return order;
}

std::vector<double> score_all(const VectorIndex& index, const EmbeddingVector& query,
                              double qnorm, bool parallel) {
  std::vector<double> sims(index.entries.size());
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
      sims[i] = similarity(index.entries[i], query, qnorm);
    }
  } else {
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
      sims[i] = similarity(index.entries[i], query, qnorm);
    }
  }
  return sims;
}

double checked_query_norm(const VectorIndex& index, const EmbeddingVector& query,
                          std::size_t k) {
  if (index.entries.empty()) fail(Errc::empty_index, "cannot search an empty vector index");
  if (k == 0) fail(Errc::argument, "k must be at least 1");
  if (query.dimension() != index.dimension) {
    fail(Errc::dimension_mismatch,
         "query has dimension " + std::to_string(query.dimension()) + ", index has " +
             std::to_string(index.dimension));
  }
  double norm = vector_norm(query.values);
  if (norm == 0.0) fail(Errc::zero_norm, "query vector has zero norm");
  return norm;
}

std::vector<Neighbor> knn_impl(const VectorIndex& index, const EmbeddingVector& query,
                               std::size_t k, bool parallel) {
  double qnorm = checked_query_norm(index, query, k);
  std::vector<double> sims = score_all(index, query, qnorm, parallel);
  std::vector<Neighbor> out;
  for (std::size_t e : top_entries(index, sims, k)) {
    out.push_back({index.entries[e].record_id, sims[e]});
  }
  return out;
}

// Midpoint of two denar amounts, halves rounded away from zero.
std::int64_t half_round(std::int64_t a, std::int64_t b) {
  std::int64_t sum = a + b;
  std::int64_t half = sum / 2;
  if (sum % 2 != 0) half += (sum > 0) ? 1 : -1;
  return half;
}

std::int64_t median_amount(std::vector<std::int64_t> amounts) {
  std::sort(amounts.begin(), amounts.end());
  std::size_t n = amounts.size();
  if (n % 2 == 1) return amounts[n / 2];
  return half_round(amounts[n / 2 - 1], amounts[n / 2]);
}

bool embeddable(std::string_view text) {
  return utf8_length(trim(text)) >= 3;
}

EvalResult evaluate_impl(const std::vector<ContractRecord>& records, double split_fraction,
                         std::uint64_t seed, std::size_t k, std::size_t dimension,
                         bool parallel) {
  if (records.size() < 10) {
    fail(Errc::argument,
         "need at least 10 records to evaluate, got " + std::to_string(records.size()));
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    fail(Errc::argument,
         "split fraction must be strictly between 0 and 1, got " + format_double(split_fraction));
  }

  std::size_t n = records.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }

  auto rounded = static_cast<std::size_t>(std::llround(static_cast<double>(n) * split_fraction));
  std::size_t train_n = std::clamp<std::size_t>(rounded, 1, n - 1);

  std::vector<const ContractRecord*> test, train;
  train.reserve(train_n);
  test.reserve(n - train_n);
  for (std::size_t i = 0; i < n; ++i) {
    (i < train_n ? train : test).push_back(&records[order[i]]);
  }

  std::vector<ContractRecord> train_records;
  train_records.reserve(train.size());
  std::vector<std::int64_t> train_amounts;
  train_amounts.reserve(train.size());
  for (const ContractRecord* r : train) {
    train_records.push_back(*r);
    train_amounts.push_back(r->amount);
  }

  VectorIndex index = build_index(train_records, dimension, seed);
  if (index.entries.empty()) {
    fail(Errc::empty_index, "no train record has an embeddable description");
  }
  std::int64_t baseline = baseline_median(train_amounts);

  // Both predictors are scored on exactly these rows.
  std::vector<const ContractRecord*> eval_rows;
  for (const ContractRecord* r : test) {
    if (embeddable(r->subject)) eval_rows.push_back(r);
  }
  if (eval_rows.empty()) {
    fail(Errc::empty_input, "no test row has an embeddable description");
  }

  std::vector<std::int64_t> knn_preds(eval_rows.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t i = 0; i < eval_rows.size(); ++i) {
      EmbeddingVector q = embed_ngram(eval_rows[i]->subject, index.dimension, index.embed_seed);
      knn_preds[i] = predict_for_query(index, q, k);
    }
  } else {
    for (std::size_t i = 0; i < eval_rows.size(); ++i) {
      EmbeddingVector q = embed_ngram(eval_rows[i]->subject, index.dimension, index.embed_seed);
      knn_preds[i] = predict_for_query(index, q, k);
    }
  }

  constexpr double kMillion = 1e6;
  std::vector<double> truths(eval_rows.size()), kp(eval_rows.size()), bp(eval_rows.size());
  for (std::size_t i = 0; i < eval_rows.size(); ++i) {
    truths[i] = static_cast<double>(eval_rows[i]->amount) / kMillion;
    kp[i] = static_cast<double>(knn_preds[i]) / kMillion;
    bp[i] = static_cast<double>(baseline) / kMillion;
  }

  EvalResult result;
  result.knn = compute_metrics(kp, truths);
  result.baseline = compute_metrics(bp, truths);
  result.train_size = train.size();
  result.test_size = eval_rows.size();
  return result;
}

json metrics_json(const Metrics& m) {
  json out;
  out["rmse"] = m.rmse;
  out["mae"] = m.mae;
  if (m.r2.has_value()) {
    out["r2"] = *m.r2;
  } else {
    out["r2"] = nullptr;
  }
  out["n"] = m.n;
  return out;
}

std::string metrics_csv_row(const char* model, const Metrics& m) {
  std::string row = model;
  row += ',';
  row += format_double(m.rmse);
  row += ',';
  row += format_double(m.mae);
  row += ',';
  row += m.r2.has_value() ? format_double(*m.r2) : std::string("undefined");
  row += ',';
  row += std::to_string(m.n);
  row += '\n';
  return row;
}

}  // namespace

EmbeddingVector embed_ngram(std::string_view text, std::size_t dimension, std::uint64_t seed) {
  if (dimension < 16) {
    fail(Errc::argument,
         "embedding dimension must be at least 16, got " + std::to_string(dimension));
  }
  std::string lowered = lower_utf8(trim(text));
  std::vector<char32_t> cps = utf8_decode(lowered);
  if (cps.size() < 3) {
    fail(Errc::text_too_short, "text too short to embed after trimming: '" + lowered + "'");
  }

  // Byte offsets of each codepoint so a 3-gram is one contiguous byte span.
  std::string bytes;
  bytes.reserve(lowered.size());
  std::vector<std::size_t> starts;
  starts.reserve(cps.size() + 1);
  for (char32_t cp : cps) {
    starts.push_back(bytes.size());
    utf8_append(bytes, cp);
  }
  starts.push_back(bytes.size());

  std::uint64_t basis = seed_state(seed);
  EmbeddingVector out;
  out.values.assign(dimension, 0.0);
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    std::size_t from = starts[i];
    std::size_t len = starts[i + 3] - from;
    std::uint64_t h = fnv1a(basis, bytes.data() + from, len);
    out.values[h % dimension] += 1.0;
  }
  double norm = vector_norm(out.values);
  for (double& v : out.values) v /= norm;
  return out;
}

VectorIndex load_vectors_text(std::string_view text,
                              const std::map<std::string, std::int64_t>& amounts) {
  VectorIndex index;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  std::map<std::string, bool> seen;

  while (pos <= text.size()) {
    if (pos == text.size() && line_no > 0) break;
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        eol == std::string_view::npos ? text.substr(pos) : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::string where = "line " + std::to_string(line_no) + ": ";

    if (!have_header) {
      std::string head = trim(line);
      char* end = nullptr;
      long dim = std::strtol(head.c_str(), &end, 10);
      if (head.empty() || end == nullptr || *end != '\0' || dim < 1) {
        fail(Errc::vector_format, where + "expected a positive dimension, got '" + head + "'");
      }
      index.dimension = static_cast<std::size_t>(dim);
      have_header = true;
      continue;
    }
    if (is_blank(line)) continue;

    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      fail(Errc::vector_format, where + "expected record_id<TAB>values");
    }
    std::string record_id(line.substr(0, tab));
    if (record_id.empty()) fail(Errc::vector_format, where + "empty record id");
    if (seen.count(record_id)) {
      fail(Errc::vector_format, where + "duplicate record '" + record_id + "'");
    }
    seen[record_id] = true;
    auto amount_it = amounts.find(record_id);
    if (amount_it == amounts.end()) {
      fail(Errc::not_found, where + "unknown record '" + record_id + "'");
    }

    IndexEntry entry;
    entry.record_id = std::move(record_id);
    entry.amount = amount_it->second;
    std::string rest(line.substr(tab + 1));
    std::size_t at = 0;
    while (at < rest.size()) {
      while (at < rest.size() && rest[at] == ' ') ++at;
      if (at >= rest.size()) break;
      std::size_t stop = rest.find(' ', at);
      if (stop == std::string::npos) stop = rest.size();
      std::string token = rest.substr(at, stop - at);
      at = stop;
      char* end = nullptr;
      double v = std::strtod(token.c_str(), &end);
      if (end == nullptr || *end != '\0' || !std::isfinite(v)) {
        fail(Errc::vector_format, where + "'" + token + "' is not a finite number");
      }
      entry.vector.values.push_back(v);
    }
    if (entry.vector.values.size() != index.dimension) {
      fail(Errc::dimension_mismatch, where + "expected " + std::to_string(index.dimension) +
                                         " values, got " +
                                         std::to_string(entry.vector.values.size()));
    }
    entry.norm = vector_norm(entry.vector.values);
    if (entry.norm == 0.0) {
      fail(Errc::zero_norm, where + "zero vector for record '" + entry.record_id + "'");
    }
    index.entries.push_back(std::move(entry));
  }
  if (!have_header) fail(Errc::vector_format, "line 1: missing dimension header");
  return index;
}

VectorIndex load_vectors(const std::string& path,
                         const std::map<std::string, std::int64_t>& amounts) {
  return load_vectors_text(read_file(path), amounts);
}

VectorIndex build_index(const std::vector<ContractRecord>& records, std::size_t dimension,
                        std::uint64_t seed) {
  if (dimension < 16) {
    fail(Errc::argument,
         "embedding dimension must be at least 16, got " + std::to_string(dimension));
  }
  VectorIndex index;
  index.dimension = dimension;
  index.embed_seed = seed;
  for (const ContractRecord& r : records) {
    if (!embeddable(r.subject)) continue;
    IndexEntry entry;
    entry.record_id = r.record_id;
    entry.vector = embed_ngram(r.subject, dimension, seed);
    entry.norm = vector_norm(entry.vector.values);
    entry.amount = r.amount;
    index.entries.push_back(std::move(entry));
  }
  return index;
}

std::vector<Neighbor> knn(const VectorIndex& index, const EmbeddingVector& query, std::size_t k) {
  return knn_impl(index, query, k, true);
}

std::vector<Neighbor> knn_serial(const VectorIndex& index, const EmbeddingVector& query,
                                 std::size_t k) {
  return knn_impl(index, query, k, false);
}

std::int64_t predict_for_query(const VectorIndex& index, const EmbeddingVector& query,
                               std::size_t k) {
  double qnorm = checked_query_norm(index, query, k);
  // Parallel scan unless already inside the per-row evaluation loop.
  std::vector<double> sims = score_all(index, query, qnorm, omp_in_parallel() == 0);
  std::vector<std::int64_t> amounts;
  for (std::size_t e : top_entries(index, sims, k)) {
    amounts.push_back(index.entries[e].amount);
  }
  return median_amount(std::move(amounts));
}

std::int64_t predict_amount(std::string_view description, const VectorIndex& index,
                            std::size_t k) {
  EmbeddingVector query = embed_ngram(description, index.dimension, index.embed_seed);
  return predict_for_query(index, query, k);
}

std::int64_t baseline_median(std::vector<std::int64_t> amounts) {
  if (amounts.empty()) fail(Errc::empty_input, "no amounts to take a median of");
  return median_amount(std::move(amounts));
}

Metrics compute_metrics(const std::vector<double>& predictions,
                        const std::vector<double>& truths) {
  if (predictions.size() != truths.size() || truths.empty()) {
    fail(Errc::argument, "predictions and truths must be equal-length and non-empty");
  }
  Metrics m;
  m.n = truths.size();
  double mean_truth = 0.0;
  for (double t : truths) mean_truth += t;
  mean_truth /= static_cast<double>(m.n);
  double se = 0.0, ae = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    double d = predictions[i] - truths[i];
    se += d * d;
    ae += std::abs(d);
    double c = truths[i] - mean_truth;
    sst += c * c;
  }
  m.rmse = std::sqrt(se / static_cast<double>(m.n));
  m.mae = ae / static_cast<double>(m.n);
  if (sst > 0.0) m.r2 = 1.0 - se / sst;
  return m;
}

EvalResult evaluate_estimator(const std::vector<ContractRecord>& records, double split_fraction,
                              std::uint64_t seed, std::size_t k, std::size_t dimension) {
  return evaluate_impl(records, split_fraction, seed, k, dimension, true);
}

EvalResult evaluate_estimator_serial(const std::vector<ContractRecord>& records,
                                     double split_fraction, std::uint64_t seed, std::size_t k,
                                     std::size_t dimension) {
  return evaluate_impl(records, split_fraction, seed, k, dimension, false);
}

std::string render_metrics_csv(const EvalResult& result) {
  std::string out = "model,rmse_millions,mae_millions,r2,n\n";
  out += metrics_csv_row("knn", result.knn);
  out += metrics_csv_row("baseline", result.baseline);
  return out;
}

std::string render_metrics_json(const EvalResult& result) {
  json out;
  out["train_size"] = result.train_size;
  out["test_size"] = result.test_size;
  out["knn"] = metrics_json(result.knn);
  out["baseline"] = metrics_json(result.baseline);
  return out.dump(2) + "\n";
}

}  // namespace procgraph
