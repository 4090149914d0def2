#include "procgraph/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "procgraph/csv.hpp"
#include "procgraph/errors.hpp"
#include "procgraph/text.hpp"

namespace procgraph {

namespace {

std::string file_stem(std::string_view path) {
  std::size_t slash = path.find_last_of("/\\");
  std::string_view name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  std::size_t dot = name.find_last_of('.');
  if (dot != std::string_view::npos && dot > 0) name = name.substr(0, dot);
  return std::string(name);
}

std::string normalize_column_name(std::string_view name) { return to_lower_ascii(trim(name)); }

}  // namespace

std::size_t RecordTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return static_cast<std::size_t>(-1);
}

std::size_t RecordTable::flagged_count() const {
  std::size_t n = 0;
  for (const auto& m : meta) n += !m.flags.empty();
  return n;
}

AliasMap default_aliases() {
  AliasMap aliases;
  for (const auto& c : kCanonicalColumns) aliases[c] = c;
  aliases["contracting authority"] = "authority";
  aliases["institution"] = "authority";
  aliases["subject of the contract"] = "subject";
  aliases["description"] = "subject";
  aliases["procurement holder"] = "supplier";
  aliases["date of the contract"] = "date";
  aliases["contract date"] = "date";
  aliases["value of the contract in denars"] = "amount";
  aliases["contract value"] = "amount";
  aliases["value"] = "amount";
  return aliases;
}

RecordTable read_csv_text(std::string_view text, std::string_view source_name, Encoding encoding) {
  std::string converted;
  if (encoding == Encoding::cp1251) {
    converted = cp1251_to_utf8(text);
    text = converted;
  }
  CsvDocument doc = parse_csv(text);
  RecordTable table;
  table.columns = doc.header;
  table.cells = std::move(doc.rows);
  std::string stem = file_stem(source_name);
  table.meta.reserve(table.cells.size());
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    table.meta.push_back({stem + "-" + std::to_string(i + 1), std::string(source_name), {}});
  }
  return table;
}

RecordTable read_csv(const std::string& path, Encoding encoding) {
  return read_csv_text(read_file(path), path, encoding);
}

RecordTable merge_tables(const std::vector<RecordTable>& tables) {
  if (tables.empty()) fail(Errc::argument, "merge_tables: need at least one table");
  // Intersect normalized column names across all inputs.
  std::set<std::string> common;
  for (const auto& c : tables.front().columns) common.insert(normalize_column_name(c));
  for (std::size_t t = 1; t < tables.size(); ++t) {
    std::set<std::string> names;
    for (const auto& c : tables[t].columns) names.insert(normalize_column_name(c));
    std::set<std::string> kept;
    std::set_intersection(common.begin(), common.end(), names.begin(), names.end(),
                          std::inserter(kept, kept.begin()));
    common = std::move(kept);
  }
  if (common.empty()) {
    std::string msg = "merge_tables: no shared columns;";
    for (const auto& t : tables) {
      msg += " [";
      for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) msg += ", ";
        msg += t.columns[i];
      }
      msg += "]";
    }
    fail(Errc::empty_column_intersection, msg);
  }

  RecordTable out;
  // Keep the first table's order and casing for the shared columns.
  std::vector<std::string> normalized_kept;
  for (const auto& c : tables.front().columns) {
    std::string n = normalize_column_name(c);
    if (common.count(n)) {
      out.columns.push_back(trim(c));
      normalized_kept.push_back(n);
    }
  }

  std::set<std::string> seen_ids;
  for (const auto& table : tables) {
    // Map each kept column to its index in this table.
    std::vector<std::size_t> index;
    for (const auto& name : normalized_kept) {
      for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (normalize_column_name(table.columns[i]) == name) {
          index.push_back(i);
          break;
        }
      }
    }
    for (std::size_t r = 0; r < table.row_count(); ++r) {
      std::vector<std::string> row;
      row.reserve(index.size());
      for (std::size_t i : index) row.push_back(table.cells[r][i]);
      out.cells.push_back(std::move(row));
      out.meta.push_back(table.meta[r]);
      if (!seen_ids.insert(table.meta[r].record_id).second) {
        fail(Errc::duplicate_record_id,
             "merge_tables: duplicate record_id " + table.meta[r].record_id);
      }
    }
  }
  return out;
}

bool glob_match(std::string_view pattern, std::string_view name) {
  // Case-insensitive match with '*' wildcards.
  std::string p = to_lower_ascii(pattern);
  std::string n = to_lower_ascii(name);
  std::size_t pi = 0, ni = 0, star = std::string::npos, mark = 0;
  while (ni < n.size()) {
    if (pi < p.size() && (p[pi] == n[ni])) {
      ++pi;
      ++ni;
    } else if (pi < p.size() && p[pi] == '*') {
      star = pi++;
      mark = ni;
    } else if (star != std::string::npos) {
      pi = star + 1;
      ni = ++mark;
    } else {
      return false;
    }
  }
  while (pi < p.size() && p[pi] == '*') ++pi;
  return pi == p.size();
}

RecordTable normalize(const RecordTable& table, const std::vector<std::string>& drop_patterns,
                      const AliasMap& aliases) {
  // canonical name -> source column index
  std::map<std::string, std::size_t> canonical_index;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    std::string name = normalize_column_name(table.columns[i]);
    bool dropped = std::any_of(drop_patterns.begin(), drop_patterns.end(),
                               [&](const std::string& p) { return glob_match(p, name); });
    if (dropped) continue;
    auto it = aliases.find(name);
    if (it == aliases.end()) continue;  // unmapped extra column, dropped
    canonical_index.emplace(it->second, i);
  }
  for (const auto& canonical : kCanonicalColumns) {
    if (!canonical_index.count(canonical)) {
      fail(Errc::missing_canonical_field, "missing canonical field: " + canonical);
    }
  }

  RecordTable out;
  out.columns = kCanonicalColumns;
  out.cells.reserve(table.row_count());
  out.meta = table.meta;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    std::vector<std::string> row;
    row.reserve(kCanonicalColumns.size());
    for (const auto& canonical : kCanonicalColumns) {
      row.push_back(trim(table.cells[r][canonical_index.at(canonical)]));
    }
    for (std::size_t c = 0; c < kCanonicalColumns.size(); ++c) {
      if (row[c].empty()) out.meta[r].flags.push_back("empty:" + kCanonicalColumns[c]);
    }
    out.cells.push_back(std::move(row));
  }
  return out;
}

std::int64_t parse_amount(std::string_view text) {
  std::string s = trim(text);
  if (s.empty()) fail(Errc::amount_not_numeric, "empty amount cell");
  // Split the optional ",dd" decimal tail.
  std::string_view whole = s;
  std::string_view frac;
  if (std::size_t comma = s.find(','); comma != std::string::npos) {
    whole = std::string_view(s).substr(0, comma);
    frac = std::string_view(s).substr(comma + 1);
    if (frac.find(',') != std::string_view::npos) {
      fail(Errc::amount_not_numeric, "more than one decimal comma in amount: " + s);
    }
  }
  unsigned long long value = 0;
  bool any_digit = false;
  for (char c : whole) {
    if (c == '.' || c == ' ') continue;  // thousands separators
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      fail(Errc::amount_not_numeric, std::string("non-numeric amount: ") + s);
    }
    value = value * 10 + static_cast<unsigned>(c - '0');
    if (value > static_cast<unsigned long long>(INT64_MAX)) {
      fail(Errc::overflow, "amount out of range: " + s);
    }
    any_digit = true;
  }
  if (!any_digit) fail(Errc::amount_not_numeric, "non-numeric amount: " + s);
  if (!frac.empty()) {
    unsigned long long cents = 0;
    int digits = 0;
    for (char c : frac) {
      if (c == ' ') continue;
      if (!std::isdigit(static_cast<unsigned char>(c)) || digits >= 2) {
        fail(Errc::amount_not_numeric, "bad decimal tail in amount: " + s);
      }
      cents = cents * 10 + static_cast<unsigned>(c - '0');
      ++digits;
    }
    if (digits == 0) fail(Errc::amount_not_numeric, "bad decimal tail in amount: " + s);
    if (digits == 1) cents *= 10;
    if (cents >= 50) ++value;  // half away from zero, amounts are non-negative here
    if (value > static_cast<unsigned long long>(INT64_MAX)) {
      fail(Errc::overflow, "amount out of range: " + s);
    }
  }
  if (value == 0) fail(Errc::amount_not_positive, "amount must be positive: " + s);
  return static_cast<std::int64_t>(value);
}

Date parse_date(std::string_view text) {
  std::string s = trim(text);
  auto all_digits = [](std::string_view v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](char c) {
      return std::isdigit(static_cast<unsigned char>(c));
    });
  };
  Date d;
  if (s.size() == 10 && (s[2] == '.' || s[2] == '/') && s[5] == s[2]) {
    // DD.MM.YYYY / DD/MM/YYYY
    std::string_view dd = std::string_view(s).substr(0, 2);
    std::string_view mm = std::string_view(s).substr(3, 2);
    std::string_view yyyy = std::string_view(s).substr(6, 4);
    if (!all_digits(dd) || !all_digits(mm) || !all_digits(yyyy)) {
      fail(Errc::date_unparseable, "unparseable date: " + s);
    }
    d.day = std::stoi(std::string(dd));
    d.month = std::stoi(std::string(mm));
    d.year = std::stoi(std::string(yyyy));
  } else if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    std::string_view yyyy = std::string_view(s).substr(0, 4);
    std::string_view mm = std::string_view(s).substr(5, 2);
    std::string_view dd = std::string_view(s).substr(8, 2);
    if (!all_digits(yyyy) || !all_digits(mm) || !all_digits(dd)) {
      fail(Errc::date_unparseable, "unparseable date: " + s);
    }
    d.year = std::stoi(std::string(yyyy));
    d.month = std::stoi(std::string(mm));
    d.day = std::stoi(std::string(dd));
  } else {
    fail(Errc::date_unparseable, "unparseable date: " + s);
  }
  if (!d.valid()) fail(Errc::date_impossible, "impossible date: " + s);
  return d;
}

void canonicalize_values(RecordTable& table) {
  std::size_t amount_col = table.column_index("amount");
  std::size_t date_col = table.column_index("date");
  if (amount_col == static_cast<std::size_t>(-1) || date_col == static_cast<std::size_t>(-1)) {
    fail(Errc::argument, "canonicalize_values: table is not normalized");
  }
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    std::string& amount = table.cells[r][amount_col];
    if (!amount.empty()) {
      try {
        amount = std::to_string(parse_amount(amount));
      } catch (const Error& e) {
        table.meta[r].flags.push_back(std::string("amount:") + e.what());
      }
    }
    std::string& date = table.cells[r][date_col];
    if (!date.empty()) {
      try {
        date = parse_date(date).iso();
      } catch (const Error& e) {
        table.meta[r].flags.push_back(std::string("date:") + e.what());
      }
    }
  }
}

std::vector<ContractRecord> to_records(const RecordTable& table) {
  std::size_t authority = table.column_index("authority");
  std::size_t subject = table.column_index("subject");
  std::size_t supplier = table.column_index("supplier");
  std::size_t date = table.column_index("date");
  std::size_t amount = table.column_index("amount");
  if (authority == static_cast<std::size_t>(-1) || amount == static_cast<std::size_t>(-1)) {
    fail(Errc::argument, "to_records: table is not normalized");
  }
  std::vector<ContractRecord> records;
  records.reserve(table.row_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    if (table.flagged(r)) continue;
    ContractRecord rec;
    rec.record_id = table.meta[r].record_id;
    rec.authority = table.cells[r][authority];
    rec.subject = table.cells[r][subject];
    rec.supplier = table.cells[r][supplier];
    rec.date = parse_date(table.cells[r][date]);
    rec.amount = parse_amount(table.cells[r][amount]);
    records.push_back(std::move(rec));
  }
  return records;
}

std::string write_normalized_csv(const RecordTable& table) {
  std::vector<std::string> header = {"record_id"};
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  header.push_back("flags");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(table.row_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    std::vector<std::string> row;
    row.reserve(header.size());
    row.push_back(table.meta[r].record_id);
    row.insert(row.end(), table.cells[r].begin(), table.cells[r].end());
    std::string flags;
    for (std::size_t i = 0; i < table.meta[r].flags.size(); ++i) {
      if (i) flags += "; ";
      flags += table.meta[r].flags[i];
    }
    row.push_back(std::move(flags));
    rows.push_back(std::move(row));
  }
  return write_csv(header, rows);
}

RecordTable read_normalized_csv_text(std::string_view text, std::string_view source_name) {
  RecordTable raw = read_csv_text(text, source_name);
  std::size_t id_col = raw.column_index("record_id");
  std::size_t flags_col = raw.column_index("flags");
  if (id_col == static_cast<std::size_t>(-1)) {
    fail(Errc::argument, "normalized CSV must carry a record_id column");
  }
  RecordTable out;
  std::vector<std::size_t> keep;
  for (const auto& canonical : kCanonicalColumns) {
    std::size_t i = raw.column_index(canonical);
    if (i == static_cast<std::size_t>(-1)) {
      fail(Errc::missing_canonical_field, "missing canonical field: " + canonical);
    }
    keep.push_back(i);
  }
  out.columns = kCanonicalColumns;
  for (std::size_t r = 0; r < raw.row_count(); ++r) {
    std::vector<std::string> row;
    for (std::size_t i : keep) row.push_back(raw.cells[r][i]);
    out.cells.push_back(std::move(row));
    RowMeta meta;
    meta.record_id = raw.cells[r][id_col];
    meta.source = std::string(source_name);
    if (flags_col != static_cast<std::size_t>(-1) && !raw.cells[r][flags_col].empty()) {
      std::string_view flags = raw.cells[r][flags_col];
      std::size_t pos = 0;
      while (pos <= flags.size()) {
        std::size_t sep = flags.find("; ", pos);
        if (sep == std::string_view::npos) {
          meta.flags.push_back(std::string(flags.substr(pos)));
          break;
        }
        meta.flags.push_back(std::string(flags.substr(pos, sep - pos)));
        pos = sep + 2;
      }
    }
    out.meta.push_back(std::move(meta));
  }
  return out;
}

RecordTable read_normalized_csv(const std::string& path) {
  return read_normalized_csv_text(read_file(path), path);
}

}  // namespace procgraph
