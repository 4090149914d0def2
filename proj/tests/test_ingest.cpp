#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "procgraph/errors.hpp"
#include "procgraph/ingest.hpp"
#include "procgraph/text.hpp"

using namespace procgraph;

namespace {

Errc kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return Errc::io;
}

}  // namespace

TEST_CASE("read_csv basics") {
  RecordTable t = read_csv_text("a,b\n1,2\n3,4\n", "two.csv");
  CHECK(t.row_count() == 2);
  CHECK(t.columns == std::vector<std::string>{"a", "b"});
  CHECK(t.cells[1][1] == "4");
  CHECK(t.meta[0].record_id == "two-1");
  CHECK(t.meta[1].record_id == "two-2");
  CHECK(t.meta[0].source == "two.csv");
}

TEST_CASE("read_csv quoting") {
  RecordTable t = read_csv_text("a,b\n\"A, B\",\"say \"\"hi\"\"\"\n", "q.csv");
  CHECK(t.cells[0][0] == "A, B");
  CHECK(t.cells[0][1] == "say \"hi\"");
}

TEST_CASE("read_csv ragged row names the line") {
  try {
    read_csv_text("a,b,c,d,e\n1,2,3,4\n", "r.csv");
    FAIL("expected ragged row error");
  } catch (const Error& e) {
    CHECK(e.kind() == Errc::ragged_row);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("read_csv trims header names") {
  RecordTable t = read_csv_text(" a , b \n1,2\n", "h.csv");
  CHECK(t.columns == std::vector<std::string>{"a", "b"});
}

TEST_CASE("merge concatenates identical columns") {
  RecordTable a = read_csv_text("x,y\n1,2\n3,4\n5,6\n", "a.csv");
  RecordTable b = read_csv_text("x,y\n7,8\n9,10\n11,12\n13,14\n", "b.csv");
  RecordTable m = merge_tables({a, b});
  CHECK(m.row_count() == 7);
  CHECK(m.columns == std::vector<std::string>{"x", "y"});
  CHECK(m.meta[0].source == "a.csv");
  CHECK(m.meta[6].source == "b.csv");
}

TEST_CASE("merge keeps the column intersection") {
  RecordTable a = read_csv_text("A,B,C\n1,2,3\n", "a.csv");
  RecordTable b = read_csv_text("B,C,D\n4,5,6\n", "b.csv");
  RecordTable m = merge_tables({a, b});
  CHECK(m.columns == std::vector<std::string>{"B", "C"});
  CHECK(m.cells[0] == std::vector<std::string>{"2", "3"});
  CHECK(m.cells[1] == std::vector<std::string>{"4", "5"});
}

TEST_CASE("merge matches column names case-insensitively") {
  RecordTable a = read_csv_text("Authority,AMOUNT\nx,1\n", "a.csv");
  RecordTable b = read_csv_text("AUTHORITY,Amount\ny,2\n", "b.csv");
  RecordTable m = merge_tables({a, b});
  CHECK(m.row_count() == 2);
  CHECK(m.columns.size() == 2);
}

TEST_CASE("merge rejects an empty intersection listing the columns") {
  RecordTable a = read_csv_text("A\n1\n", "a.csv");
  RecordTable b = read_csv_text("B\n2\n", "b.csv");
  try {
    merge_tables({a, b});
    FAIL("expected empty intersection error");
  } catch (const Error& e) {
    CHECK(e.kind() == Errc::empty_column_intersection);
    std::string msg = e.what();
    CHECK(msg.find("A") != std::string::npos);
    CHECK(msg.find("B") != std::string::npos);
  }
}

TEST_CASE("merge is associative up to row order") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<RecordTable> tables;
    for (int t = 0; t < 3; ++t) {
      std::string text = "k,v,w\n";
      int rows = 1 + static_cast<int>(rng() % 5);
      for (int r = 0; r < rows; ++r) {
        text += std::to_string(rng() % 100) + "," + std::to_string(rng() % 100) + "," +
                std::to_string(rng() % 100) + "\n";
      }
      tables.push_back(read_csv_text(text, "t" + std::to_string(t) + ".csv"));
    }
    RecordTable flat = merge_tables({tables[0], tables[1], tables[2]});
    RecordTable nested = merge_tables({merge_tables({tables[0], tables[1]}), tables[2]});
    CHECK(flat.columns == nested.columns);
    auto key = [](const RecordTable& t) {
      std::vector<std::string> rows;
      for (std::size_t i = 0; i < t.row_count(); ++i) {
        std::string k = t.meta[i].record_id;
        for (const auto& c : t.cells[i]) k += "|" + c;
        rows.push_back(k);
      }
      std::sort(rows.begin(), rows.end());
      return rows;
    };
    CHECK(key(flat) == key(nested));
  }
}

TEST_CASE("normalize drops, renames and reorders") {
  RecordTable t = read_csv_text(
      "No.,Authority,Subject,Supplier,Date,Amount\n"
      "1,MoH,Gloves,Alka,01.02.2021,100\n",
      "n.csv");
  RecordTable n = normalize(t, {"No."});
  CHECK(n.columns == kCanonicalColumns);
  CHECK(n.cells[0] == std::vector<std::string>{"MoH", "Gloves", "Alka", "01.02.2021", "100"});
  CHECK_FALSE(n.flagged(0));
}

TEST_CASE("normalize flags rows with empty canonical cells") {
  RecordTable t = read_csv_text(
      "authority,subject,supplier,date,amount\n"
      "MoH,Gloves,,01.02.2021,100\n"
      "MoH,Gloves,Alka,01.02.2021,100\n",
      "f.csv");
  RecordTable n = normalize(t, {});
  CHECK(n.row_count() == 2);
  CHECK(n.flagged(0));
  CHECK_FALSE(n.flagged(1));
  CHECK(n.flagged_count() == 1);
  CHECK(n.meta[0].flags[0] == "empty:supplier");
}

TEST_CASE("normalize reports a missing canonical field") {
  RecordTable t = read_csv_text("authority,subject,supplier,date\nA,S,P,01.01.2021\n", "m.csv");
  try {
    normalize(t, {});
    FAIL("expected missing field error");
  } catch (const Error& e) {
    CHECK(e.kind() == Errc::missing_canonical_field);
    CHECK(std::string(e.what()).find("amount") != std::string::npos);
  }
}

TEST_CASE("normalize applies drop patterns with wildcards") {
  RecordTable t = read_csv_text(
      "internal ref,authority,subject,supplier,date,amount\nX,A,S,P,01.01.2021,5\n", "w.csv");
  RecordTable n = normalize(t, {"internal*"});
  CHECK(n.columns == kCanonicalColumns);
}

TEST_CASE("parse_amount handles the corpus renderings") {
  CHECK(parse_amount("241.083.174.450") == 241083174450);
  CHECK(parse_amount("9.656.285.000") == 9656285000);
  CHECK(parse_amount("100") == 100);
  CHECK(parse_amount("1 234 567") == 1234567);
  CHECK(parse_amount("12.450.000") == 12450000);
}

TEST_CASE("parse_amount decimal tail rounds half away from zero") {
  CHECK(parse_amount("100,49") == 100);
  CHECK(parse_amount("100,50") == 101);
  CHECK(parse_amount("100,5") == 101);
  CHECK(parse_amount("1.000,99") == 1001);
}

TEST_CASE("parse_amount error kinds") {
  CHECK(kind_of([] { parse_amount("abc"); }) == Errc::amount_not_numeric);
  CHECK(kind_of([] { parse_amount(""); }) == Errc::amount_not_numeric);
  CHECK(kind_of([] { parse_amount("12x34"); }) == Errc::amount_not_numeric);
  CHECK(kind_of([] { parse_amount("0"); }) == Errc::amount_not_positive);
  CHECK(kind_of([] { parse_amount("0,4"); }) == Errc::amount_not_positive);
  // '-' sits outside the amount grammar entirely
  CHECK(kind_of([] { parse_amount("-5"); }) == Errc::amount_not_numeric);
}

TEST_CASE("parse_amount round-trips format_amount") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 999999999999ull);
    CHECK(parse_amount(format_amount(n)) == n);
  }
}

TEST_CASE("parse_date accepts the three declared formats") {
  CHECK(parse_date("31.12.2021").iso() == "2021-12-31");
  CHECK(parse_date("31/12/2021").iso() == "2021-12-31");
  CHECK(parse_date("2021-12-31").iso() == "2021-12-31");
  CHECK(parse_date("01.01.2019").iso() == "2019-01-01");
}

TEST_CASE("parse_date rejects impossible and malformed dates") {
  CHECK(kind_of([] { parse_date("31.02.2020"); }) == Errc::date_impossible);
  CHECK(kind_of([] { parse_date("01.13.2020"); }) == Errc::date_impossible);
  CHECK(kind_of([] { parse_date("2021-02-30"); }) == Errc::date_impossible);
  CHECK(kind_of([] { parse_date("soon"); }) == Errc::date_unparseable);
  CHECK(kind_of([] { parse_date(""); }) == Errc::date_unparseable);
  CHECK(parse_date("29.02.2020").iso() == "2020-02-29");  // leap year
  CHECK(kind_of([] { parse_date("29.02.2021"); }) == Errc::date_impossible);
}

TEST_CASE("parse_date output is canonical and idempotent") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    int year = 1990 + static_cast<int>(rng() % 40);
    int month = 1 + static_cast<int>(rng() % 12);
    int day = 1 + static_cast<int>(rng() % days_in_month(year, month));
    char buf[16];
    switch (rng() % 3) {
      case 0: std::snprintf(buf, sizeof(buf), "%02d.%02d.%04d", day, month, year); break;
      case 1: std::snprintf(buf, sizeof(buf), "%02d/%02d/%04d", day, month, year); break;
      default: std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day); break;
    }
    std::string iso = parse_date(buf).iso();
    REQUIRE(iso.size() == 10);
    CHECK(iso[4] == '-');
    CHECK(iso[7] == '-');
    for (int p : {0, 1, 2, 3, 5, 6, 8, 9}) CHECK(std::isdigit(static_cast<unsigned char>(iso[p])));
    CHECK(parse_date(iso).iso() == iso);
  }
}

TEST_CASE("canonicalize_values rewrites amounts and dates") {
  RecordTable t = read_csv_text(
      "authority,subject,supplier,date,amount\n"
      "A,S,P,31.12.2021,12.450.000\n"
      "B,S2,Q,bad-date,100\n"
      "C,S3,R,01.01.2021,zero denars\n",
      "c.csv");
  RecordTable n = normalize(t, {});
  canonicalize_values(n);
  CHECK(n.cells[0][3] == "2021-12-31");
  CHECK(n.cells[0][4] == "12450000");
  CHECK(n.flagged(1));
  CHECK(n.cells[1][3] == "bad-date");  // raw text kept
  CHECK(n.flagged(2));
  CHECK(n.cells[2][4] == "zero denars");
}

TEST_CASE("to_records keeps only clean rows, typed") {
  RecordTable t = read_csv_text(
      "authority,subject,supplier,date,amount\n"
      "A,S,P,31.12.2021,12.450.000\n"
      "B,S2,,01.01.2021,100\n",
      "r.csv");
  RecordTable n = normalize(t, {});
  canonicalize_values(n);
  auto records = to_records(n);
  REQUIRE(records.size() == 1);
  CHECK(records[0].record_id == "r-1");
  CHECK(records[0].authority == "A");
  CHECK(records[0].amount == 12450000);
  CHECK(records[0].date.iso() == "2021-12-31");
}

TEST_CASE("normalized csv round-trips") {
  RecordTable n = fixtures::synth_table(25, 4, 7);
  canonicalize_values(n);
  std::string wire = write_normalized_csv(n);
  RecordTable back = read_normalized_csv_text(wire, "wire.csv");
  REQUIRE(back.row_count() == n.row_count());
  CHECK(back.columns == n.columns);
  for (std::size_t i = 0; i < n.row_count(); ++i) {
    CHECK(back.cells[i] == n.cells[i]);
    CHECK(back.meta[i].record_id == n.meta[i].record_id);
    CHECK(back.meta[i].flags == n.meta[i].flags);
  }
  CHECK(write_normalized_csv(back) == wire);
}

TEST_CASE("cp1251 input decodes to the same records as utf8") {
  // "Министерство" in cp1251 bytes
  std::string cyr = "\xCC\xE8\xED\xE8\xF1\xF2\xE5\xF0\xF1\xF2\xE2\xEE";
  std::string csv = "authority,subject,supplier,date,amount\n" + cyr + ",S,P,01.01.2021,100\n";
  RecordTable t = read_csv_text(csv, "cp.csv", Encoding::cp1251);
  CHECK(t.cells[0][0] == "Министерство");
}

TEST_CASE("glob_match") {
  CHECK(glob_match("internal*", "internal ref"));
  CHECK(glob_match("*ref", "internal ref"));
  CHECK(glob_match("no.", "No."));  // case-insensitive
  CHECK(glob_match("*", "anything"));
  CHECK_FALSE(glob_match("internal*", "ref internal"));
  CHECK(glob_match("a*c", "abc"));
  CHECK_FALSE(glob_match("a*c", "abd"));
}
