#ifndef PROCGRAPH_CSV_HPP
#define PROCGRAPH_CSV_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace procgraph {

// RFC-4180 style document: header + data rows. Quoted fields may contain
// commas, doubled quotes and newlines. Rows whose cell count differs from
// the header raise Errc::ragged_row naming the 1-based line.
struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based physical line each row starts on
};

CsvDocument parse_csv(std::string_view text);

std::string csv_escape(std::string_view cell);
std::string write_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

}  // namespace procgraph

#endif  // PROCGRAPH_CSV_HPP
