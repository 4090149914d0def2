#include "procgraph/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "procgraph/csv.hpp"
#include "procgraph/decimal.hpp"
#include "procgraph/errors.hpp"
#include "procgraph/query.hpp"
#include "procgraph/text.hpp"

namespace procgraph {

namespace {

std::string iri(const std::string& s) { return "<" + s + ">"; }

SolutionTable run(const Graph& graph, const std::string& text) {
  return evaluate(graph, parse_query(text));
}

std::string label_of(const Graph& graph, const std::string& entity) {
  auto hits = graph.match({Term::make_iri(entity), Term::make_iri(std::string(kRdfsLabel)),
                           std::nullopt});
  if (!hits.empty() && !hits[0].object.is_iri()) return hits[0].object.text;
  auto slash = entity.rfind('/');
  return slash == std::string::npos ? entity : entity.substr(slash + 1);
}

std::int64_t amount_of(const Term& t) {
  auto d = Decimal::parse(t.text);
  if (d) {
    if (auto i = d->to_int()) return *i;
    return std::llround(d->to_double());
  }
  fail(Errc::eval_error, "amount '" + t.text + "' is not numeric");
}

// a > total/count without division, exact: a*count > total.
bool exceeds_mean(const Decimal& a, const Decimal& total, std::int64_t count) {
  __int128 lhs = static_cast<__int128>(a.units()) * count;
  __int128 rhs = total.units();
  int shift = total.scale() - a.scale();
  for (int i = 0; i < shift; ++i) lhs *= 10;
  for (int i = 0; i < -shift; ++i) rhs *= 10;
  return lhs > rhs;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string iri_tail(const std::string& s) {
  auto slash = s.rfind('/');
  return slash == std::string::npos ? s : s.substr(slash + 1);
}

std::optional<Date> latest_contract_date(const Graph& graph, const Vocabulary& vocab) {
  // Not MAX(?d): that throws on an empty graph, and unparseable lexicals
  // should simply not anchor the window.
  auto t = run(graph, "SELECT ?d WHERE { ?c " + iri(vocab.has_date) + " ?d }");
  std::optional<Date> latest;
  for (const auto& r : t.rows) {
    auto d = parse_iso_date(r[0].text);
    if (d && (!latest || *latest < *d)) latest = d;
  }
  return latest;
}

}  // namespace

std::vector<ReportRow> canned_report(const Graph& graph, const Vocabulary& vocab,
                                     const ReportOptions& options) {
  if (!graph.frozen()) fail(Errc::argument, "graph must be frozen");
  std::vector<ReportRow> rows;
  auto absent = [&](const std::string& metric) { rows.push_back({metric, "absent", ""}); };

  const std::string contract_type = "?c a " + iri(vocab.contract_class) + " . ";
  const std::string has_inst = " " + iri(vocab.has_institution) + " ";
  const std::string has_supp = " " + iri(vocab.has_supplier) + " ";
  const std::string has_amount = " " + iri(vocab.has_amount) + " ";
  const std::string has_date = " " + iri(vocab.has_date) + " ";

  auto total_table =
      run(graph, "SELECT (COUNT(?c) AS ?n) WHERE { " + contract_type + "}");
  rows.push_back({"total_contracts", total_table.rows[0][0].text, ""});
  std::int64_t total_contracts = std::stoll(total_table.rows[0][0].text);

  auto sum_table = run(graph, "SELECT (SUM(?a) AS ?t) WHERE { " + contract_type + "?c" +
                                  has_amount + "?a }");
  rows.push_back({"total_amount", sum_table.rows[0][0].text, ""});

  auto year_table =
      run(graph, "SELECT (YEAR(?d) AS ?y) (COUNT(?c) AS ?n) WHERE { ?c" + has_date +
                     "?d } GROUP BY ?y ORDER BY DESC(?n) LIMIT 1");
  if (year_table.rows.empty()) {
    absent("year_most_contracts");
  } else {
    rows.push_back({"year_most_contracts", year_table.rows[0][0].text, ""});
  }

  auto inst_counts =
      run(graph, "SELECT ?i (COUNT(?c) AS ?n) WHERE { ?c" + has_inst +
                     "?i } GROUP BY ?i ORDER BY DESC(?n) LIMIT 1");
  if (inst_counts.rows.empty()) {
    absent("institution_most_contracts");
    absent("max_contracts_by_institution");
  } else {
    const std::string& winner = inst_counts.rows[0][0].text;
    rows.push_back({"institution_most_contracts", label_of(graph, winner), winner});
    rows.push_back({"max_contracts_by_institution", inst_counts.rows[0][1].text, winner});
  }

  auto top_value = run(graph, "SELECT ?c ?a WHERE { ?c" + has_amount +
                                  "?a } ORDER BY DESC(?a) LIMIT 1");
  if (top_value.rows.empty()) {
    absent("highest_contract_value");
  } else {
    rows.push_back(
        {"highest_contract_value", top_value.rows[0][1].text, top_value.rows[0][0].text});
  }

  auto top_supplier =
      run(graph, "SELECT ?s (SUM(?a) AS ?t) WHERE { ?c" + has_supp + "?s . ?c" + has_amount +
                     "?a } GROUP BY ?s ORDER BY DESC(?t) LIMIT 1");
  if (top_supplier.rows.empty()) {
    absent("supplier_highest_total_value");
  } else {
    const std::string& winner = top_supplier.rows[0][0].text;
    rows.push_back({"supplier_highest_total_value", label_of(graph, winner), winner});
  }

  auto diverse =
      run(graph, "SELECT ?i (COUNT(DISTINCT ?s) AS ?n) WHERE { ?c" + has_inst + "?i . ?c" +
                     has_supp + "?s } GROUP BY ?i ORDER BY DESC(?n) LIMIT 1");
  if (diverse.rows.empty()) {
    absent("most_supplier_diverse_institution");
  } else {
    const std::string& winner = diverse.rows[0][0].text;
    rows.push_back({"most_supplier_diverse_institution", label_of(graph, winner), winner});
  }

  auto pair = run(graph, "SELECT ?i ?s (COUNT(?c) AS ?n) WHERE { ?c" + has_inst + "?i . ?c" +
                             has_supp + "?s } GROUP BY ?i ?s ORDER BY DESC(?n) LIMIT 1");
  if (pair.rows.empty()) {
    absent("most_common_pair");
  } else {
    rows.push_back({"most_common_pair",
                    label_of(graph, pair.rows[0][0].text) + " / " +
                        label_of(graph, pair.rows[0][1].text),
                    pair.rows[0][0].text});
  }

  auto inst_count =
      run(graph, "SELECT (COUNT(DISTINCT ?i) AS ?n) WHERE { ?c" + has_inst + "?i }");
  std::int64_t institutions = std::stoll(inst_count.rows[0][0].text);
  if (institutions == 0) {
    absent("avg_contracts_per_institution");
  } else {
    double avg = static_cast<double>(total_contracts) / static_cast<double>(institutions);
    rows.push_back({"avg_contracts_per_institution", format_double(avg), ""});
  }

  auto top_avg =
      run(graph, "SELECT ?i (AVG(?a) AS ?m) WHERE { ?c" + has_inst + "?i . ?c" + has_amount +
                     "?a } GROUP BY ?i ORDER BY DESC(?m) LIMIT 1");
  if (top_avg.rows.empty()) {
    absent("top_avg_contract_value_institution");
  } else {
    const std::string& winner = top_avg.rows[0][0].text;
    rows.push_back({"top_avg_contract_value_institution", label_of(graph, winner), winner});
  }

  std::optional<int> year = options.year;
  if (!year) {
    if (auto latest = latest_contract_date(graph, vocab)) year = latest->year;
  }
  if (!year) {
    absent("highest_total_institution_in_year");
  } else {
    auto top_year = run(graph, "SELECT ?i (SUM(?a) AS ?t) WHERE { ?c" + has_inst + "?i . ?c" +
                                   has_amount + "?a . ?c" + has_date + "?d FILTER(YEAR(?d) = " +
                                   std::to_string(*year) +
                                   ") } GROUP BY ?i ORDER BY DESC(?t) LIMIT 1");
    if (top_year.rows.empty()) {
      absent("highest_total_institution_in_year");
    } else {
      const std::string& winner = top_year.rows[0][0].text;
      rows.push_back({"highest_total_institution_in_year",
                      std::to_string(*year) + ": " + label_of(graph, winner), winner});
    }
  }

  auto december = run(graph, "SELECT ?c ?a ?d WHERE { ?c" + has_amount + "?a . ?c" + has_date +
                                 "?d FILTER(MONTH(?d) = 12) } ORDER BY DESC(?a)");
  const ReportRow* december_row = nullptr;
  ReportRow december_best;
  for (const auto& r : december.rows) {
    auto d = parse_iso_date(r[2].text);
    if (!d || d->day < options.late_december_from || d->day > options.late_december_to) continue;
    auto supplier = graph.match({Term::make_iri(r[0].text),
                                 Term::make_iri(vocab.has_supplier), std::nullopt});
    std::string who = supplier.empty() ? iri_tail(r[0].text)
                                       : label_of(graph, supplier[0].object.text);
    december_best = {"top_contract_late_december", r[1].text + " (" + who + ")", r[0].text};
    december_row = &december_best;
    break;  // rows arrive amount-descending, ties IRI-ascending
  }
  if (december_row) {
    rows.push_back(*december_row);
  } else {
    absent("top_contract_late_december");
  }
  return rows;
}

std::vector<QuarterStats> quarterly_stats(const Graph& graph, const Vocabulary& vocab,
                                          int window_years) {
  if (!graph.frozen()) fail(Errc::argument, "graph must be frozen");
  if (window_years <= 0) fail(Errc::argument, "window must be a positive number of years");
  auto latest = latest_contract_date(graph, vocab);
  if (!latest) fail(Errc::empty_input, "graph has no dated contracts");
  int first_year = latest->year - window_years + 1;

  auto table = run(graph,
                   "SELECT (YEAR(?d) AS ?y) (QUARTER(?d) AS ?q) (COUNT(?c) AS ?n) "
                   "(MIN(?a) AS ?lo) (MAX(?a) AS ?hi) (AVG(?a) AS ?mean) "
                   "(MEDIAN(?a) AS ?median) (STDDEV(?a) AS ?sd) WHERE { ?c " +
                       iri(vocab.has_date) + " ?d . ?c " + iri(vocab.has_amount) +
                       " ?a FILTER(YEAR(?d) >= " + std::to_string(first_year) +
                       ") } GROUP BY ?y ?q ORDER BY ?y ?q");
  std::vector<QuarterStats> out;
  for (const auto& r : table.rows) {
    QuarterStats s;
    s.year = static_cast<int>(std::stol(r[0].text));
    s.quarter = static_cast<int>(std::stol(r[1].text));
    s.count = static_cast<std::size_t>(std::stoull(r[2].text));
    s.min = amount_of(r[3]);
    s.max = amount_of(r[4]);
    s.mean = std::stod(r[5].text);
    s.median = std::stod(r[6].text);
    s.stddev = std::stod(r[7].text);
    out.push_back(s);
  }
  return out;
}

std::vector<AboveAverageRow> above_average_contracts(const Graph& graph,
                                                     const Vocabulary& vocab) {
  if (!graph.frozen()) fail(Errc::argument, "graph must be frozen");
  auto table = run(graph, "SELECT ?c ?a WHERE { ?c " + iri(vocab.has_amount) + " ?a }");
  if (table.rows.empty()) return {};

  Decimal total;
  std::vector<std::pair<std::string, Decimal>> amounts;
  amounts.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    auto d = Decimal::parse(r[1].text);
    if (!d) fail(Errc::eval_error, "amount '" + r[1].text + "' is not numeric");
    total = total.plus(*d);
    amounts.emplace_back(r[0].text, *d);
  }
  std::int64_t count = static_cast<std::int64_t>(amounts.size());

  std::vector<AboveAverageRow> out;
  for (const auto& [contract, amount] : amounts) {
    if (exceeds_mean(amount, total, count)) {
      out.push_back({contract, amount.to_int() ? *amount.to_int()
                                               : std::llround(amount.to_double())});
    }
  }
  std::sort(out.begin(), out.end(), [](const AboveAverageRow& a, const AboveAverageRow& b) {
    if (a.amount != b.amount) return a.amount > b.amount;
    return a.contract < b.contract;
  });
  return out;
}

TrendSeries institution_trend(const Graph& graph, const Vocabulary& vocab,
                              const std::string& institution_iri) {
  if (!graph.frozen()) fail(Errc::argument, "graph must be frozen");
  Term inst = Term::make_iri(institution_iri);
  Term type_pred = Term::make_iri(std::string(kRdfType));
  Term inst_class = Term::make_iri(vocab.institution_class);

  if (graph.match({inst, type_pred, inst_class}).empty()) {
    // Suggest near misses by slug distance.
    std::vector<std::string> known;
    graph.for_each_match({std::nullopt, type_pred, inst_class},
                         [&](const Triple& t) { known.push_back(t.subject.text); });
    std::string want = iri_tail(institution_iri);
    std::sort(known.begin(), known.end(), [&](const std::string& a, const std::string& b) {
      std::size_t da = levenshtein(iri_tail(a), want);
      std::size_t db = levenshtein(iri_tail(b), want);
      if (da != db) return da < db;
      return a < b;
    });
    std::string msg = "unknown institution <" + institution_iri + ">";
    if (!known.empty()) {
      msg += "; nearest:";
      for (std::size_t i = 0; i < known.size() && i < 3; ++i) msg += " <" + known[i] + ">";
    }
    fail(Errc::not_found, msg);
  }

  TrendSeries series;
  series.institution = institution_iri;
  series.label = label_of(graph, institution_iri);
  auto table = run(graph, "SELECT ?d ?a ?c WHERE { ?c " + iri(vocab.has_institution) + " " +
                              iri(institution_iri) + " . ?c " + iri(vocab.has_date) +
                              " ?d . ?c " + iri(vocab.has_amount) + " ?a } ORDER BY ?d");
  for (const auto& r : table.rows) {
    auto d = parse_iso_date(r[0].text);
    if (!d) continue;  // unparseable dates cannot be placed on the time axis
    series.points.push_back({*d, amount_of(r[1])});
  }
  return series;
}

std::string render_report_csv(const std::vector<ReportRow>& rows) {
  std::string out = "metric,value,entity\n";
  for (const auto& r : rows) {
    out += csv_escape(r.metric) + "," + csv_escape(r.value) + "," + csv_escape(r.entity) + "\n";
  }
  return out;
}

std::string render_report_json(const std::vector<ReportRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json obj;
    obj["metric"] = r.metric;
    obj["value"] = r.value;
    if (!r.entity.empty()) obj["entity"] = r.entity;
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::string render_quarters_csv(const std::vector<QuarterStats>& rows) {
  std::string out = "year,quarter,count,min,max,mean,median,stddev\n";
  for (const auto& s : rows) {
    out += std::to_string(s.year) + "," + std::to_string(s.quarter) + "," +
           std::to_string(s.count) + "," + std::to_string(s.min) + "," + std::to_string(s.max) +
           "," + format_double(s.mean) + "," + format_double(s.median) + "," +
           format_double(s.stddev) + "\n";
  }
  return out;
}

std::string render_quarters_json(const std::vector<QuarterStats>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : rows) {
    nlohmann::json obj;
    obj["year"] = s.year;
    obj["quarter"] = s.quarter;
    obj["count"] = s.count;
    obj["min"] = s.min;
    obj["max"] = s.max;
    obj["mean"] = s.mean;
    obj["median"] = s.median;
    obj["stddev"] = s.stddev;
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::string render_trend_csv(const TrendSeries& series) {
  std::string out = "date,amount\n";
  for (const auto& p : series.points) {
    out += p.date.iso() + "," + std::to_string(p.amount) + "\n";
  }
  return out;
}

std::string render_above_average_csv(const std::vector<AboveAverageRow>& rows) {
  std::string out = "contract,amount\n";
  for (const auto& r : rows) {
    out += csv_escape(r.contract) + "," + std::to_string(r.amount) + "\n";
  }
  return out;
}

std::string render_trend_json(const TrendSeries& series) {
  nlohmann::json out;
  out["institution"] = series.institution;
  out["label"] = series.label;
  out["points"] = nlohmann::json::array();
  for (const auto& p : series.points) {
    nlohmann::json pj;
    pj["date"] = p.date.iso();
    pj["amount"] = p.amount;
    out["points"].push_back(pj);
  }
  return out.dump(2) + "\n";
}

std::string render_above_average_json(const std::vector<AboveAverageRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json rj;
    rj["contract"] = r.contract;
    rj["amount"] = r.amount;
    out.push_back(rj);
  }
  return out.dump(2) + "\n";
}

}  // namespace procgraph
