#ifndef PROCGRAPH_ANALYTICS_HPP
#define PROCGRAPH_ANALYTICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "procgraph/date.hpp"
#include "procgraph/mapping.hpp"
#include "procgraph/rdf.hpp"

namespace procgraph {

struct ReportRow {
  std::string metric;
  std::string value;
  std::string entity;  // supporting IRI, empty when not applicable
};

struct ReportOptions {
  std::optional<int> year;      // year scope of the per-year metric; default latest
  int late_december_from = 20;  // day window of the year-end metric
  int late_december_to = 31;
};

// The canned statistics battery. Every metric is answered by a query over
// the graph; argmax ties go to the lexicographically smallest entity IRI.
// On an empty graph counts are zero and entity metrics read "absent".
std::vector<ReportRow> canned_report(const Graph& graph, const Vocabulary& vocab,
                                     const ReportOptions& options = {});

struct QuarterStats {
  int year = 0;
  int quarter = 0;
  std::size_t count = 0;
  std::int64_t min = 0;
  std::int64_t max = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // sample; 0 when count == 1
};

// Per-quarter amount statistics over the last window_years calendar years,
// anchored at the latest contract date in the graph.
std::vector<QuarterStats> quarterly_stats(const Graph& graph, const Vocabulary& vocab,
                                          int window_years);

struct AboveAverageRow {
  std::string contract;  // IRI
  std::int64_t amount = 0;
};

// Contracts whose amount strictly exceeds the global mean, descending by
// amount (ties by contract IRI). The mean comparison is exact.
std::vector<AboveAverageRow> above_average_contracts(const Graph& graph,
                                                     const Vocabulary& vocab);

struct TrendPoint {
  Date date;
  std::int64_t amount = 0;
};

struct TrendSeries {
  std::string institution;  // IRI
  std::string label;
  std::vector<TrendPoint> points;  // date-sorted
};

// All contracts of one institution as a date-sorted series. An unknown IRI
// raises a not-found error naming the nearest institution IRIs.
TrendSeries institution_trend(const Graph& graph, const Vocabulary& vocab,
                              const std::string& institution_iri);

std::string render_report_csv(const std::vector<ReportRow>& rows);
std::string render_report_json(const std::vector<ReportRow>& rows);
std::string render_quarters_csv(const std::vector<QuarterStats>& rows);
std::string render_quarters_json(const std::vector<QuarterStats>& rows);
std::string render_trend_csv(const TrendSeries& series);
std::string render_trend_json(const TrendSeries& series);
std::string render_above_average_json(const std::vector<AboveAverageRow>& rows);
std::string render_above_average_csv(const std::vector<AboveAverageRow>& rows);

// Standalone SVG documents; deterministic text for equal input. Data points
// carry class="pt", bars class="bar".
std::string render_trend_svg(const TrendSeries& series);
std::string render_quarterly_svg(const std::vector<QuarterStats>& rows);

}  // namespace procgraph

#endif  // PROCGRAPH_ANALYTICS_HPP
