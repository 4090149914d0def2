#ifndef PROCGRAPH_DATE_HPP
#define PROCGRAPH_DATE_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace procgraph {

// Proleptic Gregorian calendar date.
struct Date {
  int year = 0;
  int month = 0;  // 1..12
  int day = 0;    // 1..31

  auto operator<=>(const Date&) const = default;

  bool valid() const;
  int quarter() const { return (month + 2) / 3; }

  // "YYYY-MM-DD", zero padded.
  std::string iso() const;

  // Days since 1970-01-01; negative before. Used for chart scaling.
  std::int64_t days_since_epoch() const;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);

// Strict ISO parse: exactly ^\d{4}-\d{2}-\d{2}$ plus calendar validity.
std::optional<Date> parse_iso_date(std::string_view s);

}  // namespace procgraph

#endif  // PROCGRAPH_DATE_HPP
