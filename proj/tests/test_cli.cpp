#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end runs of the installed binary against the sample corpus.
// PROCGRAPH_BIN and SAMPLE_DIR come from the build system.

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("procgraph-cli-" + std::to_string(getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

RunResult run_cli(const std::string& args) {
  fs::path out_path = work_dir() / "stdout.txt";
  fs::path err_path = work_dir() / "stderr.txt";
  std::string cmd = std::string("\"") + PROCGRAPH_BIN + "\" " + args + " >\"" +
                    out_path.string() + "\" 2>\"" + err_path.string() + "\"";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

std::string sample(const std::string& name) {
  return (fs::path(SAMPLE_DIR) / name).string();
}

std::string art(const std::string& name) { return (work_dir() / name).string(); }

int line_count(const std::string& text) {
  int n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

// keep the header and the rows whose flags field (the last one) is empty
std::string drop_flagged(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string out;
  bool header = true;
  while (std::getline(in, line)) {
    if (header || (!line.empty() && line.back() == ',')) {
      out += line;
      out += '\n';
    }
    header = false;
  }
  return out;
}

}  // namespace

TEST_CASE("usage surface") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("").code == 2);            // a subcommand is required
  CHECK(run_cli("frobnicate").code == 2);  // unknown subcommand
  CHECK(run_cli("query --graph missing.nt").code == 2);  // --query is required
  RunResult bad_format = run_cli("report --graph whatever.nt --format xml");
  CHECK(bad_format.code == 2);
  CHECK(bad_format.err.find("csv or json") != std::string::npos);
  spit(art("empty.nt"), "");
  CHECK(run_cli("stats --graph " + art("empty.nt") + " --window-years 0").code == 2);
}

TEST_CASE("sample corpus pipeline") {
  std::string cfg = " --config " + sample("pipeline.json");
  std::string inputs =
      " --input " + sample("contracts_2021_h1.csv") + " --input " + sample("contracts_2021_h2.csv");

  RunResult ingest = run_cli("ingest" + cfg + inputs + " --output " + art("norm.csv"));
  CHECK(ingest.code == 0);
  std::string norm = slurp(art("norm.csv"));
  CHECK(norm.rfind("record_id,authority,subject,supplier,date,amount,flags\n", 0) == 0);
  CHECK(line_count(norm) == 25);  // header plus twelve rows from each file

  // one sample row has an empty amount, so the strict mapping refuses
  RunResult strict = run_cli("map" + cfg + " --input " + art("norm.csv") + " --mapping " +
                             sample("mapping.json") + " --output " + art("graph.nt"));
  CHECK(strict.code == 1);
  CHECK(strict.err.find("flagged") != std::string::npos);

  RunResult map = run_cli("map --include-flagged" + cfg + " --input " + art("norm.csv") +
                          " --mapping " + sample("mapping.json") + " --output " + art("graph.nt"));
  CHECK(map.code == 0);
  CHECK(map.err.find("contracts_2021_h2-7") != std::string::npos);
  std::string graph = slurp(art("graph.nt"));
  CHECK(graph.find("<https://procurement.example.org/contract/") != std::string::npos);

  // drop the flagged row for the analysis stages
  spit(art("clean.csv"), drop_flagged(norm));
  RunResult clean_map = run_cli("map" + cfg + " --input " + art("clean.csv") + " --mapping " +
                                sample("mapping.json") + " --output " + art("clean.nt"));
  CHECK(clean_map.code == 0);

  SUBCASE("the run is reproducible byte for byte") {
    RunResult again = run_cli("ingest" + cfg + inputs + " --output " + art("norm2.csv"));
    CHECK(again.code == 0);
    CHECK(slurp(art("norm2.csv")) == norm);
    RunResult map2 = run_cli("map --include-flagged" + cfg + " --input " + art("norm2.csv") +
                             " --mapping " + sample("mapping.json") + " --output " + art("graph2.nt"));
    CHECK(map2.code == 0);
    CHECK(slurp(art("graph2.nt")) == graph);
  }

  SUBCASE("shapes catch the included bad row, the cleaned graph conforms") {
    RunResult tainted = run_cli("validate --graph " + art("graph.nt") + " --mapping " +
                                sample("mapping.json"));
    CHECK(tainted.code == 1);
    CHECK(tainted.out.rfind("conforms: false", 0) == 0);
    CHECK(tainted.out.find("minExclusive") != std::string::npos);
    CHECK(tainted.out.find("h2-7") != std::string::npos);

    RunResult builtin = run_cli("validate --graph " + art("clean.nt") + " --mapping " +
                                sample("mapping.json"));
    CHECK(builtin.code == 0);
    CHECK(builtin.out.rfind("conforms: true", 0) == 0);
    RunResult configured = run_cli("validate --graph " + art("clean.nt") + " --shapes " +
                                   sample("shapes.json") + " --format json");
    CHECK(configured.code == 0);
    CHECK(configured.out.find("\"conforms\": true") != std::string::npos);
  }

  SUBCASE("queries, reports, stats and trends run over the clean graph") {
    RunResult query = run_cli("query --graph " + art("clean.nt") + " --query " +
                              sample("queries/top_institutions.rq"));
    CHECK(query.code == 0);
    CHECK(query.out.rfind("inst,contracts,total\n", 0) == 0);
    CHECK(line_count(query.out) >= 3);

    RunResult query_json = run_cli("query --graph " + art("clean.nt") + " --query " +
                                   sample("queries/quarterly_totals.rq") + " --format json");
    CHECK(query_json.code == 0);
    CHECK(query_json.out.find("\"quarter\"") != std::string::npos);

    RunResult report = run_cli("report --graph " + art("clean.nt") + " --mapping " +
                               sample("mapping.json"));
    CHECK(report.code == 0);
    CHECK(report.out.rfind("metric,value,entity\n", 0) == 0);
    CHECK(report.out.find("total_contracts,23,") != std::string::npos);

    RunResult stats = run_cli("stats --graph " + art("clean.nt") + " --mapping " +
                              sample("mapping.json") + " --window-years 1 --svg " +
                              art("quarters.svg"));
    CHECK(stats.code == 0);
    CHECK(stats.out.rfind("year,quarter,count,min,max,mean,median,stddev\n", 0) == 0);
    CHECK(slurp(art("quarters.svg")).find("class=\"bar\"") != std::string::npos);

    RunResult trend = run_cli("trend --graph " + art("clean.nt") +
                              " --institution \"Ministry of health\" --mapping " +
                              sample("mapping.json") + " --svg " + art("trend.svg"));
    CHECK(trend.code == 0);
    CHECK(trend.out.rfind("date,amount\n", 0) == 0);
    CHECK(slurp(art("trend.svg")).find("class=\"pt\"") != std::string::npos);

    RunResult lost = run_cli("trend --graph " + art("clean.nt") +
                             " --institution \"Ministry of helth\" --mapping " +
                             sample("mapping.json"));
    CHECK(lost.code == 1);
    CHECK(lost.err.find("nearest") != std::string::npos);
  }

  SUBCASE("estimation commands work from the normalized corpus") {
    RunResult predict = run_cli("predict \"Procurement of medical gloves\"" + cfg +
                                " --input " + art("norm.csv"));
    CHECK(predict.code == 0);
    CHECK(predict.out.size() > 1);
    CHECK(predict.out.back() == '\n');
    for (std::size_t i = 0; i + 1 < predict.out.size(); ++i) {
      bool ok = (predict.out[i] >= '0' && predict.out[i] <= '9') || predict.out[i] == '.';
      CHECK(ok);
    }

    // external vectors: the held-out record's neighbors decide the estimate
    spit(art("pair.vec"), "2\ncontracts_2021_h1-1\t1 0\ncontracts_2021_h1-2\t1 0\n");
    RunResult held = run_cli("predict" + cfg + " --input " + art("norm.csv") + " --vectors " +
                             art("pair.vec") + " --record-id contracts_2021_h1-1");
    CHECK(held.code == 0);
    CHECK(held.out == "98.300.000\n");  // the one remaining neighbor's amount

    RunResult evaluate = run_cli("evaluate" + cfg + " --input " + art("norm.csv") +
                                 " --split 0.7 --seed 3 --k 3");
    CHECK(evaluate.code == 0);
    CHECK(evaluate.out.rfind("model,rmse_millions,mae_millions,r2,n\n", 0) == 0);
    CHECK(evaluate.out.find("knn,") != std::string::npos);
    CHECK(evaluate.out.find("baseline,") != std::string::npos);

    RunResult evaluate_json = run_cli("evaluate" + cfg + " --input " + art("norm.csv") +
                                      " --format json");
    CHECK(evaluate_json.code == 0);
    CHECK(evaluate_json.out.find("\"knn\"") != std::string::npos);
  }

  SUBCASE("results go to stdout unless --output is given") {
    RunResult to_file = run_cli("report --graph " + art("clean.nt") + " --mapping " +
                                sample("mapping.json") + " --output " + art("report.csv"));
    CHECK(to_file.code == 0);
    CHECK(to_file.out.empty());
    CHECK(slurp(art("report.csv")).rfind("metric,value,entity\n", 0) == 0);
  }
}

TEST_CASE("data problems exit 1, usage problems exit 2") {
  // a row with an empty supplier cell gets flagged at ingest
  spit(art("raw.csv"),
       "authority,subject,supplier,date,amount\n"
       "Ministry of health,Gloves,Alkaloid,2021-01-15,1000\n"
       "Ministry of health,Masks,,2021-02-20,2000\n");
  RunResult ingest = run_cli("ingest --input " + art("raw.csv") + " --output " + art("flagged.csv"));
  CHECK(ingest.code == 0);
  CHECK(ingest.err.find("1 of 2 rows flagged") != std::string::npos);

  RunResult strict = run_cli("map --input " + art("flagged.csv") + " --output " + art("x.nt"));
  CHECK(strict.code == 1);
  CHECK(strict.err.find("flagged") != std::string::npos);

  RunResult lenient = run_cli("map --include-flagged --input " + art("flagged.csv") +
                              " --output " + art("gappy.nt"));
  CHECK(lenient.code == 0);
  CHECK(lenient.err.find("row 2") != std::string::npos);

  RunResult verdict = run_cli("validate --graph " + art("gappy.nt"));
  CHECK(verdict.code == 1);
  CHECK(verdict.out.rfind("conforms: false", 0) == 0);
  CHECK(verdict.out.find("hasSupplier") != std::string::npos);

  CHECK(run_cli("validate --graph " + art("does-not-exist.nt")).code == 1);

  spit(art("bad.rq"), "SELECT ?x WHERE {\n  ?x <oops\n}\n");
  RunResult broken = run_cli("query --graph " + art("gappy.nt") + " --query " + art("bad.rq"));
  CHECK(broken.code == 1);
  CHECK(broken.err.find("line") != std::string::npos);

  RunResult terse = run_cli("predict \"ab\" --input " + art("flagged.csv"));
  CHECK(terse.code == 2);
  CHECK(terse.err.find("at least 3") != std::string::npos);

  RunResult thin = run_cli("evaluate --input " + art("flagged.csv"));
  CHECK(thin.code == 2);  // far fewer than ten records
}
