#include "procgraph/csv.hpp"

#include "procgraph/errors.hpp"
#include "procgraph/text.hpp"

namespace procgraph {

namespace {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
};

// One logical record; empty optional-like flag via out parameter.
bool read_record(Cursor& cur, std::vector<std::string>& out, std::size_t& start_line) {
  // Skip fully empty physical lines between records.
  while (!cur.done() && (cur.peek() == '\n' || cur.peek() == '\r')) cur.take();
  if (cur.done()) return false;
  start_line = cur.line;
  out.clear();
  std::string cell;
  bool in_quotes = false;
  while (true) {
    if (cur.done()) {
      if (in_quotes) fail(Errc::csv_syntax, "unterminated quoted field at line " + std::to_string(start_line));
      out.push_back(std::move(cell));
      return true;
    }
    char c = cur.take();
    if (in_quotes) {
      if (c == '"') {
        if (!cur.done() && cur.peek() == '"') {
          cell.push_back('"');
          cur.take();
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (cell.empty()) {
          in_quotes = true;
        } else {
          cell.push_back(c);  // stray quote inside unquoted cell, keep verbatim
        }
        break;
      case ',':
        out.push_back(std::move(cell));
        cell.clear();
        break;
      case '\r':
        if (!cur.done() && cur.peek() == '\n') cur.take();
        out.push_back(std::move(cell));
        return true;
      case '\n':
        out.push_back(std::move(cell));
        return true;
      default:
        cell.push_back(c);
    }
  }
}

}  // namespace

CsvDocument parse_csv(std::string_view text) {
  // Strip a UTF-8 BOM if present.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  Cursor cur{text};
  CsvDocument doc;
  std::vector<std::string> record;
  std::size_t start_line = 0;
  if (!read_record(cur, record, start_line)) {
    fail(Errc::csv_syntax, "empty CSV input: header row is mandatory");
  }
  for (auto& name : record) doc.header.push_back(trim(name));
  while (read_record(cur, record, start_line)) {
    if (record.size() != doc.header.size()) {
      fail(Errc::ragged_row, "line " + std::to_string(start_line) + ": row has " +
                                 std::to_string(record.size()) + " cells, header has " +
                                 std::to_string(doc.header.size()));
    }
    doc.rows.push_back(std::move(record));
    doc.row_lines.push_back(start_line);
    record = {};
  }
  return doc;
}

std::string csv_escape(std::string_view cell) {
  bool needs_quotes = cell.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quotes) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string write_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_escape(header[i]);
  }
  out.push_back('\n');
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      out += csv_escape(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace procgraph
