#include "procgraph/decimal.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "procgraph/errors.hpp"

namespace procgraph {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) fail(Errc::overflow, "decimal arithmetic overflow");
  return static_cast<std::int64_t>(v);
}

i128 pow10_128(int n) {
  i128 p = 1;
  for (int i = 0; i < n; ++i) p *= 10;
  return p;
}

}  // namespace

Decimal::Decimal(std::int64_t units, int scale) : units_(units), scale_(scale) {
  if (scale < 0 || scale > 18) fail(Errc::overflow, "decimal scale out of range");
  normalize();
}

void Decimal::normalize() {
  while (scale_ > 0 && units_ % 10 == 0) {
    units_ /= 10;
    --scale_;
  }
  if (units_ == 0) scale_ = 0;
}

std::optional<Decimal> Decimal::parse(std::string_view lexical) {
  if (lexical.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (lexical[i] == '+' || lexical[i] == '-') {
    neg = lexical[i] == '-';
    ++i;
  }
  i128 units = 0;
  int scale = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < lexical.size(); ++i) {
    char c = lexical[i];
    if (c == '.') {
      if (seen_point) return std::nullopt;
      seen_point = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    any_digit = true;
    units = units * 10 + (c - '0');
    if (units > i128(INT64_MAX)) return std::nullopt;
    if (seen_point) {
      ++scale;
      if (scale > 18) return std::nullopt;
    }
  }
  if (!any_digit) return std::nullopt;
  return Decimal(neg ? -narrow(units) : narrow(units), scale);
}

std::string Decimal::str() const {
  if (scale_ == 0) return std::to_string(units_);
  std::string digits = std::to_string(units_ < 0 ? -units_ : units_);
  while (digits.size() <= static_cast<std::size_t>(scale_)) digits.insert(digits.begin(), '0');
  std::string out;
  if (units_ < 0) out.push_back('-');
  out.append(digits, 0, digits.size() - scale_);
  out.push_back('.');
  out.append(digits, digits.size() - scale_, std::string::npos);
  return out;
}

double Decimal::to_double() const {
  return static_cast<double>(units_) / std::pow(10.0, scale_);
}

std::optional<std::int64_t> Decimal::to_int() const {
  if (scale_ != 0) return std::nullopt;
  return units_;
}

Decimal Decimal::plus(const Decimal& other) const {
  int scale = std::max(scale_, other.scale_);
  i128 a = i128(units_) * pow10_128(scale - scale_);
  i128 b = i128(other.units_) * pow10_128(scale - other.scale_);
  return Decimal(narrow(a + b), scale);
}

Decimal Decimal::midpoint(const Decimal& a, const Decimal& b) {
  Decimal sum = a.plus(b);
  if (sum.units_ % 2 == 0) return Decimal(sum.units_ / 2, sum.scale_);
  return Decimal(narrow(i128(sum.units_) * 5), sum.scale_ + 1);
}

std::strong_ordering Decimal::compare(const Decimal& other) const {
  int scale = std::max(scale_, other.scale_);
  i128 a = i128(units_) * pow10_128(scale - scale_);
  i128 b = i128(other.units_) * pow10_128(scale - other.scale_);
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace procgraph
