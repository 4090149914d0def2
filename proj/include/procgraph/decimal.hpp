#ifndef PROCGRAPH_DECIMAL_HPP
#define PROCGRAPH_DECIMAL_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace procgraph {

// Exact decimal number: units * 10^-scale. Kept normalized (no trailing
// fractional zeros, scale 0 for integers) so equal values compare equal
// field-wise. Arithmetic is exact and throws Errc::overflow when a result
// leaves the int64 range.
class Decimal {
 public:
  Decimal() = default;
  explicit Decimal(std::int64_t integral) : units_(integral), scale_(0) {}
  Decimal(std::int64_t units, int scale);

  static std::optional<Decimal> parse(std::string_view lexical);

  std::int64_t units() const { return units_; }
  int scale() const { return scale_; }
  bool is_integral() const { return scale_ == 0; }
  bool negative() const { return units_ < 0; }

  // Canonical lexical form, e.g. "-12.5", "300".
  std::string str() const;
  double to_double() const;
  // Integral value; nullopt when the decimal has a fraction.
  std::optional<std::int64_t> to_int() const;

  Decimal plus(const Decimal& other) const;
  // Exact midpoint of two decimals (used for even-count medians).
  static Decimal midpoint(const Decimal& a, const Decimal& b);

  std::strong_ordering compare(const Decimal& other) const;
  bool operator==(const Decimal& other) const { return compare(other) == 0; }
  bool operator<(const Decimal& other) const { return compare(other) < 0; }

 private:
  void normalize();

  std::int64_t units_ = 0;
  int scale_ = 0;
};

}  // namespace procgraph

#endif  // PROCGRAPH_DECIMAL_HPP
