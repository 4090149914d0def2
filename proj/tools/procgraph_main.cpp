// procgraph: procurement contracts to knowledge graph, plus the analysis
// and estimation commands that run over it.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "procgraph/analytics.hpp"
#include "procgraph/errors.hpp"
#include "procgraph/estimator.hpp"
#include "procgraph/ingest.hpp"
#include "procgraph/mapping.hpp"
#include "procgraph/pipeline.hpp"
#include "procgraph/query.hpp"
#include "procgraph/rdf.hpp"
#include "procgraph/shapes.hpp"
#include "procgraph/text.hpp"

namespace {

using namespace procgraph;

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;

struct Options {
  std::vector<std::string> inputs;
  std::string output;
  std::string mapping;
  std::string shapes;
  std::string query;
  std::string format = "csv";
  std::string graph;
  std::string institution;
  std::string svg;
  std::string config;
  std::string vectors;
  std::string record_id;
  std::string description;
  std::string encoding = "utf8";
  std::size_t k = 0;          // 0: take the config value
  double split = 0.8;
  std::optional<std::uint64_t> seed;
  int window_years = 2;
  std::optional<int> year;
  bool include_flagged = false;
};

void emit(const std::string& output_path, const std::string& content) {
  if (output_path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
  } else {
    write_file(output_path, content);
  }
}

PipelineConfig effective_config(const Options& opt) {
  PipelineConfig config;
  if (!opt.config.empty()) config = load_pipeline_config(opt.config);
  if (opt.k > 0) config.k = opt.k;
  if (opt.seed.has_value()) config.seed = *opt.seed;
  if (!opt.mapping.empty()) config.mapping_path = opt.mapping;
  if (!opt.shapes.empty()) config.shapes_path = opt.shapes;
  return config;
}

MappingSpec mapping_spec(const PipelineConfig& config) {
  if (!config.mapping_path.empty()) return parse_mapping(read_file(config.mapping_path));
  return default_mapping(config.base_iri);
}

Graph load_graph(const std::string& path) {
  if (path.empty()) fail(Errc::argument, "--graph is required");
  Graph g = parse_ntriples(read_file(path));
  g.freeze();
  return g;
}

void check_format(const std::string& format) {
  if (format != "csv" && format != "json") {
    fail(Errc::argument, "--format must be csv or json, got '" + format + "'");
  }
}

int run_ingest(const Options& opt) {
  PipelineConfig config = effective_config(opt);
  Encoding enc;
  if (opt.encoding == "utf8") {
    enc = Encoding::utf8;
  } else if (opt.encoding == "cp1251") {
    enc = Encoding::cp1251;
  } else {
    fail(Errc::argument, "--encoding must be utf8 or cp1251, got '" + opt.encoding + "'");
  }
  std::vector<RecordTable> tables;
  for (const std::string& path : opt.inputs) {
    tables.push_back(read_csv(path, enc));
  }
  RecordTable merged = merge_tables(tables);
  RecordTable normal = normalize(merged, config.drop_patterns, config.aliases);
  canonicalize_values(normal);
  if (normal.flagged_count() > 0) {
    std::fprintf(stderr, "%zu of %zu rows flagged\n", normal.flagged_count(),
                 normal.row_count());
  }
  emit(opt.output, write_normalized_csv(normal));
  return kOk;
}

int run_map(const Options& opt) {
  PipelineConfig config = effective_config(opt);
  if (opt.inputs.empty()) fail(Errc::argument, "--input is required");
  RecordTable table = read_normalized_csv(opt.inputs.front());
  MappingSpec spec = mapping_spec(config);
  FlaggedRows policy = opt.include_flagged ? FlaggedRows::include : FlaggedRows::reject;
  MappingResult result = execute_mapping(table, spec, policy);
  for (const auto& d : result.diagnostics) {
    std::fprintf(stderr, "row %zu (%s): %s\n", d.row + 1, d.record_id.c_str(),
                 d.message.c_str());
  }
  emit(opt.output, serialize_ntriples(result.graph));
  return kOk;
}

int run_validate(const Options& opt) {
  PipelineConfig config = effective_config(opt);
  Graph graph = load_graph(opt.graph);
  ShapeSet shapes;
  if (!config.shapes_path.empty()) {
    shapes = parse_shapes(read_file(config.shapes_path), config.base_iri);
  } else {
    shapes = builtin_shapes(mapping_spec(config).vocabulary());
  }
  ValidationReport report = validate(graph, shapes);
  emit(opt.output,
       opt.format == "json" ? render_report_json(report) : render_report_text(report));
  return report.conforms ? kOk : kDataError;
}

int run_query(const Options& opt) {
  Graph graph = load_graph(opt.graph);
  if (opt.query.empty()) fail(Errc::argument, "--query is required");
  QueryPlan plan = parse_query(read_file(opt.query));
  SolutionTable table = evaluate(graph, plan);
  emit(opt.output,
       opt.format == "json" ? render_solutions_json(table) : render_solutions_csv(table));
  return kOk;
}

int run_report(const Options& opt) {
  PipelineConfig config = effective_config(opt);
  Graph graph = load_graph(opt.graph);
  Vocabulary vocab = mapping_spec(config).vocabulary();
  ReportOptions options;
  options.year = opt.year;
  std::vector<ReportRow> rows = canned_report(graph, vocab, options);
  emit(opt.output, opt.format == "json" ? render_report_json(rows) : render_report_csv(rows));
  return kOk;
}

int run_stats(const Options& opt) {
  PipelineConfig config = effective_config(opt);
  Graph graph = load_graph(opt.graph);
  Vocabulary vocab = mapping_spec(config).vocabulary();
  if (opt.window_years < 1) fail(Errc::argument, "--window-years must be at least 1");
  std::vector<QuarterStats> rows = quarterly_stats(graph, vocab, opt.window_years);
  if (!opt.svg.empty()) write_file(opt.svg, render_quarterly_svg(rows));
  emit(opt.output, opt.format == "json" ? render_quarters_json(rows) : render_quarters_csv(rows));
  return kOk;
}

int run_trend(const Options& opt) {
  PipelineConfig config = effective_config(opt);
  Graph graph = load_graph(opt.graph);
  MappingSpec spec = mapping_spec(config);
  if (opt.institution.empty()) fail(Errc::argument, "--institution is required");
  std::string iri = opt.institution;
  if (!is_valid_iri(iri)) {
    // not an IRI: treat as an institution label
    iri = mint_iri(spec.base_iri, spec.institution.segment, opt.institution);
  }
  TrendSeries series = institution_trend(graph, spec.vocabulary(), iri);
  if (!opt.svg.empty()) write_file(opt.svg, render_trend_svg(series));
  emit(opt.output, opt.format == "json" ? render_trend_json(series) : render_trend_csv(series));
  return kOk;
}

std::vector<ContractRecord> records_from(const std::string& path) {
  if (path.empty()) fail(Errc::argument, "--input is required");
  RecordTable table = read_normalized_csv(path);
  return to_records(table);
}

int run_predict(const Options& opt) {
  PipelineConfig config = effective_config(opt);
  std::vector<ContractRecord> records =
      records_from(opt.inputs.empty() ? std::string() : opt.inputs.front());

  if (!opt.vectors.empty()) {
    // External vectors carry no embedder, so the query must be one of the
    // indexed records: hold it out and predict from the rest.
    if (opt.record_id.empty()) {
      fail(Errc::argument, "--vectors needs --record-id to pick the query row");
    }
    std::map<std::string, std::int64_t> amounts;
    for (const auto& r : records) amounts[r.record_id] = r.amount;
    VectorIndex full = load_vectors(opt.vectors, amounts);
    VectorIndex rest;
    rest.dimension = full.dimension;
    rest.embed_seed = full.embed_seed;
    const IndexEntry* held = nullptr;
    for (const auto& e : full.entries) {
      if (e.record_id == opt.record_id) {
        held = &e;
      } else {
        rest.entries.push_back(e);
      }
    }
    if (held == nullptr) {
      fail(Errc::not_found, "record '" + opt.record_id + "' is not in the vector file");
    }
    std::int64_t estimate = predict_for_query(rest, held->vector, config.k);
    emit(opt.output, format_amount(estimate) + "\n");
    return kOk;
  }

  if (utf8_length(trim(opt.description)) < 3) {
    fail(Errc::argument, "description must have at least 3 characters");
  }
  VectorIndex index = build_index(records, kDefaultEmbedDim, config.seed);
  std::int64_t estimate = predict_amount(opt.description, index, config.k);
  emit(opt.output, format_amount(estimate) + "\n");
  return kOk;
}

int run_evaluate(const Options& opt) {
  PipelineConfig config = effective_config(opt);
  std::vector<ContractRecord> records =
      records_from(opt.inputs.empty() ? std::string() : opt.inputs.front());
  EvalResult result =
      evaluate_estimator(records, opt.split, config.seed, config.k, kDefaultEmbedDim);
  emit(opt.output,
       opt.format == "json" ? render_metrics_json(result) : render_metrics_csv(result));
  return kOk;
}

int dispatch(const std::string& name, const Options& opt) {
  try {
    check_format(opt.format);
    if (name == "ingest") return run_ingest(opt);
    if (name == "map") return run_map(opt);
    if (name == "validate") return run_validate(opt);
    if (name == "query") return run_query(opt);
    if (name == "report") return run_report(opt);
    if (name == "stats") return run_stats(opt);
    if (name == "trend") return run_trend(opt);
    if (name == "predict") return run_predict(opt);
    if (name == "evaluate") return run_evaluate(opt);
    std::fprintf(stderr, "unknown subcommand '%s'\n", name.c_str());
    return kUsageError;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case Errc::config:
      case Errc::argument:
      case Errc::text_too_short:
        return kUsageError;
      default:
        return kDataError;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"procurement contract graph toolkit"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "pipeline config file (JSON)");
    sub->add_option("--output", opt.output, "write result here instead of stdout");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "merge CSV exports into one normalized CSV");
  ingest->add_option("--input", opt.inputs, "source CSV file (repeatable)")->required();
  ingest->add_option("--encoding", opt.encoding, "utf8 or cp1251");
  add_common(ingest);

  CLI::App* map_cmd = app.add_subcommand("map", "normalized CSV to N-Triples graph");
  map_cmd->add_option("--input", opt.inputs, "normalized CSV")->required();
  map_cmd->add_option("--mapping", opt.mapping, "mapping config (JSON)");
  map_cmd->add_flag("--include-flagged", opt.include_flagged,
                    "map flagged rows with raw values instead of rejecting the run");
  add_common(map_cmd);

  CLI::App* validate_cmd = app.add_subcommand("validate", "check a graph against shapes");
  validate_cmd->add_option("--graph", opt.graph, "N-Triples graph")->required();
  validate_cmd->add_option("--shapes", opt.shapes, "shape config (JSON); built-ins otherwise");
  validate_cmd->add_option("--mapping", opt.mapping, "mapping config, for the built-in shapes");
  validate_cmd->add_option("--format", opt.format, "csv (text) or json");
  add_common(validate_cmd);

  CLI::App* query_cmd = app.add_subcommand("query", "run a query file against a graph");
  query_cmd->add_option("--graph", opt.graph, "N-Triples graph")->required();
  query_cmd->add_option("--query", opt.query, "query file")->required();
  query_cmd->add_option("--format", opt.format, "csv or json");
  add_common(query_cmd);

  CLI::App* report_cmd = app.add_subcommand("report", "canned corpus metrics");
  report_cmd->add_option("--graph", opt.graph, "N-Triples graph")->required();
  report_cmd->add_option("--mapping", opt.mapping, "mapping config");
  report_cmd->add_option("--format", opt.format, "csv or json");
  report_cmd->add_option("--year", opt.year, "year scope for the per-year metric");
  add_common(report_cmd);

  CLI::App* stats_cmd = app.add_subcommand("stats", "quarterly amount statistics");
  stats_cmd->add_option("--graph", opt.graph, "N-Triples graph")->required();
  stats_cmd->add_option("--mapping", opt.mapping, "mapping config");
  stats_cmd->add_option("--window-years", opt.window_years, "calendar years to cover");
  stats_cmd->add_option("--format", opt.format, "csv or json");
  stats_cmd->add_option("--svg", opt.svg, "also write a bar chart here");
  add_common(stats_cmd);

  CLI::App* trend_cmd = app.add_subcommand("trend", "per-institution amount series");
  trend_cmd->add_option("--graph", opt.graph, "N-Triples graph")->required();
  trend_cmd->add_option("--institution", opt.institution, "institution IRI or label")->required();
  trend_cmd->add_option("--mapping", opt.mapping, "mapping config");
  trend_cmd->add_option("--format", opt.format, "csv or json");
  trend_cmd->add_option("--svg", opt.svg, "also write a line chart here");
  add_common(trend_cmd);

  CLI::App* predict_cmd = app.add_subcommand("predict", "estimate a contract amount in denars");
  predict_cmd->add_option("description", opt.description, "contract description text");
  predict_cmd->add_option("--input", opt.inputs, "normalized CSV of known contracts")->required();
  predict_cmd->add_option("--vectors", opt.vectors, "external vector file");
  predict_cmd->add_option("--record-id", opt.record_id,
                          "query record for --vectors (held out of the index)");
  predict_cmd->add_option("--k", opt.k, "neighbor count");
  predict_cmd->add_option("--seed", opt.seed, "embedding seed");
  add_common(predict_cmd);

  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score the estimator on a split");
  evaluate_cmd->add_option("--input", opt.inputs, "normalized CSV of known contracts")->required();
  evaluate_cmd->add_option("--split", opt.split, "train fraction, in (0, 1)");
  evaluate_cmd->add_option("--seed", opt.seed, "shuffle and embedding seed");
  evaluate_cmd->add_option("--k", opt.k, "neighbor count");
  evaluate_cmd->add_option("--format", opt.format, "csv or json");
  add_common(evaluate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  return dispatch(app.get_subcommands().front()->get_name(), opt);
}
