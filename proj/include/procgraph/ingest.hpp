#ifndef PROCGRAPH_INGEST_HPP
#define PROCGRAPH_INGEST_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "procgraph/date.hpp"

namespace procgraph {

// Names of the five canonical columns, in canonical order.
inline const std::vector<std::string> kCanonicalColumns = {
    "authority", "subject", "supplier", "date", "amount"};

struct RowMeta {
  std::string record_id;            // "<source-file-stem>-<1-based row index>"
  std::string source;               // source file name
  std::vector<std::string> flags;   // empty for clean rows
};

// Tabular carrier used by every ingest stage. Cells are raw text until
// canonicalize_values; columns are the current column names.
struct RecordTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> cells;  // row-major, arity = columns.size()
  std::vector<RowMeta> meta;                    // one per row

  std::size_t row_count() const { return cells.size(); }
  // Index of a column by exact name; npos when absent.
  std::size_t column_index(std::string_view name) const;
  bool flagged(std::size_t row) const { return !meta[row].flags.empty(); }
  std::size_t flagged_count() const;
};

// Fully typed row, available once a table is normalized and canonicalized.
struct ContractRecord {
  std::string record_id;
  std::string authority;
  std::string subject;
  std::string supplier;
  Date date;
  std::int64_t amount = 0;  // whole denars, > 0
};

enum class Encoding { utf8, cp1251 };

// source column name (lowercased, trimmed) -> canonical column name
using AliasMap = std::map<std::string, std::string>;

// Identity aliases plus the English export headers.
AliasMap default_aliases();

RecordTable read_csv(const std::string& path, Encoding encoding = Encoding::utf8);
RecordTable read_csv_text(std::string_view text, std::string_view source_name,
                          Encoding encoding = Encoding::utf8);

// Columns = intersection of the inputs' column-name sets (case-insensitive),
// in the first table's order; rows concatenated, provenance kept.
RecordTable merge_tables(const std::vector<RecordTable>& tables);

// Drops columns matching drop_patterns ('*' wildcards, case-insensitive),
// renames survivors through the alias map and reorders to the canonical
// five. Rows with an empty canonical cell are flagged, never dropped.
RecordTable normalize(const RecordTable& table, const std::vector<std::string>& drop_patterns,
                      const AliasMap& aliases = default_aliases());

// "241.083.174.450" -> 241083174450. Dots and spaces are thousands
// separators; an optional ",dd" tail rounds half away from zero.
std::int64_t parse_amount(std::string_view text);

// Accepts DD.MM.YYYY, DD/MM/YYYY and YYYY-MM-DD.
Date parse_date(std::string_view text);

// Rewrites amount/date cells of a normalized table into canonical form
// ("241083174450", "2021-12-31"); rows whose cells do not parse are flagged
// and keep their raw text.
void canonicalize_values(RecordTable& table);

// Typed records for the unflagged rows of a normalized+canonicalized table.
std::vector<ContractRecord> to_records(const RecordTable& table);

// Normalized-CSV wire format: record_id,authority,subject,supplier,date,amount,flags
std::string write_normalized_csv(const RecordTable& table);
RecordTable read_normalized_csv(const std::string& path);
RecordTable read_normalized_csv_text(std::string_view text, std::string_view source_name);

bool glob_match(std::string_view pattern, std::string_view name);

}  // namespace procgraph

#endif  // PROCGRAPH_INGEST_HPP
