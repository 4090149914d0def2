#ifndef PROCGRAPH_ERRORS_HPP
#define PROCGRAPH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace procgraph {

// Error kinds, grouped by pipeline stage. The CLI maps these onto exit codes.
enum class Errc {
  // io / configuration
  io,
  config,
  argument,
  // csv / ingest
  csv_syntax,
  ragged_row,
  empty_column_intersection,
  missing_canonical_field,
  duplicate_record_id,
  amount_not_numeric,
  amount_not_positive,
  date_unparseable,
  date_impossible,
  // rdf
  invalid_iri,
  invalid_term,
  literal_in_subject,
  frozen_graph,
  ntriples_syntax,
  // mapping
  mapping_config,
  duplicate_rule,
  empty_slug,
  flagged_rows_present,
  // shapes
  shape_config,
  // query
  query_syntax,
  unknown_prefix,
  ungrouped_variable,
  unbound_filter_variable,
  filter_type_error,
  eval_error,
  // analytics
  empty_input,
  not_found,
  // estimator
  text_too_short,
  vector_format,
  dimension_mismatch,
  zero_norm,
  empty_index,
  overflow,
};

class Error : public std::runtime_error {
 public:
  Error(Errc kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  Errc kind() const noexcept { return kind_; }

 private:
  Errc kind_;
};

[[noreturn]] inline void fail(Errc kind, std::string message) {
  throw Error(kind, std::move(message));
}

}  // namespace procgraph

#endif  // PROCGRAPH_ERRORS_HPP
