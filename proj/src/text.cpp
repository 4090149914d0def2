#include "procgraph/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "procgraph/errors.hpp"

namespace procgraph {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (static_cast<unsigned char>(s[b]) <= ' ')) ++b;
  while (e > b && (static_cast<unsigned char>(s[e - 1]) <= ' ')) --e;
  return std::string(s.substr(b, e - b));
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return static_cast<unsigned char>(c) <= ' '; });
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<char32_t> utf8_decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07;
      len = 4;
    } else {
      fail(Errc::io, "invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > s.size()) fail(Errc::io, "truncated UTF-8 sequence at offset " + std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80)
        fail(Errc::io, "invalid UTF-8 continuation byte at offset " + std::to_string(i + k));
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void utf8_append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string utf8_encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size() * 2);
  for (char32_t cp : cps) utf8_append(out, cp);
  return out;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

char32_t lower_codepoint(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  // Latin-1 supplement, except the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Latin extended-A comes in upper/lower pairs.
  if (cp >= 0x100 && cp <= 0x177 && (cp % 2) == 0) return cp + 1;
  if (cp >= 0x179 && cp <= 0x17D && (cp % 2) == 1) return cp + 1;
  // Cyrillic А..Я and the Ѐ..Џ row used by Macedonian.
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

bool is_letter_codepoint(char32_t cp) {
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
  if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;
  if (cp >= 0x100 && cp <= 0x17F) return true;
  if (cp >= 0x400 && cp <= 0x4FF) return true;
  return false;
}

bool is_digit_codepoint(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

std::string lower_utf8(std::string_view s) {
  auto cps = utf8_decode(s);
  for (char32_t& cp : cps) cp = lower_codepoint(cp);
  return utf8_encode(cps);
}

namespace {

// (base, combining mark) -> composed codepoint.
struct Composition {
  char32_t base;
  char32_t mark;
  char32_t composed;
};

constexpr Composition kCompositions[] = {
    // Cyrillic
    {0x0438, 0x0306, 0x0439}, {0x0418, 0x0306, 0x0419},  // й Й
    {0x0435, 0x0300, 0x0450}, {0x0415, 0x0300, 0x0400},  // ѐ Ѐ
    {0x0438, 0x0300, 0x045D}, {0x0418, 0x0300, 0x040D},  // ѝ Ѝ
    {0x0435, 0x0308, 0x0451}, {0x0415, 0x0308, 0x0401},  // ё Ё
    {0x0433, 0x0301, 0x0453}, {0x0413, 0x0301, 0x0403},  // ѓ Ѓ
    {0x043A, 0x0301, 0x045C}, {0x041A, 0x0301, 0x040C},  // ќ Ќ
    {0x0443, 0x0306, 0x045E}, {0x0423, 0x0306, 0x040E},  // ў Ў
    // Latin vowels with grave/acute/circumflex/diaeresis
    {U'a', 0x0300, 0xE0}, {U'a', 0x0301, 0xE1}, {U'a', 0x0302, 0xE2}, {U'a', 0x0308, 0xE4},
    {U'e', 0x0300, 0xE8}, {U'e', 0x0301, 0xE9}, {U'e', 0x0302, 0xEA}, {U'e', 0x0308, 0xEB},
    {U'i', 0x0300, 0xEC}, {U'i', 0x0301, 0xED}, {U'i', 0x0302, 0xEE}, {U'i', 0x0308, 0xEF},
    {U'o', 0x0300, 0xF2}, {U'o', 0x0301, 0xF3}, {U'o', 0x0302, 0xF4}, {U'o', 0x0308, 0xF6},
    {U'u', 0x0300, 0xF9}, {U'u', 0x0301, 0xFA}, {U'u', 0x0302, 0xFB}, {U'u', 0x0308, 0xFC},
    {U'A', 0x0300, 0xC0}, {U'A', 0x0301, 0xC1}, {U'A', 0x0302, 0xC2}, {U'A', 0x0308, 0xC4},
    {U'E', 0x0300, 0xC8}, {U'E', 0x0301, 0xC9}, {U'E', 0x0302, 0xCA}, {U'E', 0x0308, 0xCB},
    {U'I', 0x0300, 0xCC}, {U'I', 0x0301, 0xCD}, {U'I', 0x0302, 0xCE}, {U'I', 0x0308, 0xCF},
    {U'O', 0x0300, 0xD2}, {U'O', 0x0301, 0xD3}, {U'O', 0x0302, 0xD4}, {U'O', 0x0308, 0xD6},
    {U'U', 0x0300, 0xD9}, {U'U', 0x0301, 0xDA}, {U'U', 0x0302, 0xDB}, {U'U', 0x0308, 0xDC},
    {U'n', 0x0303, 0xF1}, {U'N', 0x0303, 0xD1},
    {U'c', 0x0327, 0xE7}, {U'C', 0x0327, 0xC7},
    {U'c', 0x030C, 0x10D}, {U'C', 0x030C, 0x10C},
    {U's', 0x030C, 0x161}, {U'S', 0x030C, 0x160},
    {U'z', 0x030C, 0x17E}, {U'Z', 0x030C, 0x17D},
};

bool is_whitespace_codepoint(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
         cp == 0x0B || cp == 0xA0 || cp == 0x2009 || cp == 0x200A || cp == 0x2002 ||
         cp == 0x2003 || cp == 0x3000;
}

}  // namespace

std::vector<char32_t> compose_nfc(std::vector<char32_t> cps) {
  std::vector<char32_t> out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    if (!out.empty()) {
      bool composed = false;
      for (const auto& c : kCompositions) {
        if (c.base == out.back() && c.mark == cp) {
          out.back() = c.composed;
          composed = true;
          break;
        }
      }
      if (composed) continue;
    }
    out.push_back(cp);
  }
  return out;
}

std::string slugify(std::string_view label) {
  auto cps = compose_nfc(utf8_decode(trim(label)));
  std::string out;
  bool pending_hyphen = false;
  for (char32_t cp : cps) {
    if (is_whitespace_codepoint(cp)) {
      if (!out.empty()) pending_hyphen = true;
      continue;
    }
    char32_t low = lower_codepoint(cp);
    if (is_letter_codepoint(low) || is_digit_codepoint(low) || low == U'-') {
      if (pending_hyphen) {
        out.push_back('-');
        pending_hyphen = false;
      }
      utf8_append(out, low);
    }
    // anything else is stripped
  }
  return out;
}

std::string cp1251_to_utf8(std::string_view bytes) {
  // Upper half of the Windows-1251 table.
  static constexpr std::array<char32_t, 128> kHigh = {
      0x0402, 0x0403, 0x201A, 0x0453, 0x201E, 0x2026, 0x2020, 0x2021, 0x20AC, 0x2030, 0x0409,
      0x2039, 0x040A, 0x040C, 0x040B, 0x040F, 0x0452, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
      0x2013, 0x2014, 0xFFFD, 0x2122, 0x0459, 0x203A, 0x045A, 0x045C, 0x045B, 0x045F, 0x00A0,
      0x040E, 0x045E, 0x0408, 0x00A4, 0x0490, 0x00A6, 0x00A7, 0x0401, 0x00A9, 0x0404, 0x00AB,
      0x00AC, 0x00AD, 0x00AE, 0x0407, 0x00B0, 0x00B1, 0x0406, 0x0456, 0x0491, 0x00B5, 0x00B6,
      0x00B7, 0x0451, 0x2116, 0x0454, 0x00BB, 0x0458, 0x0405, 0x0455, 0x0457, 0x0410, 0x0411,
      0x0412, 0x0413, 0x0414, 0x0415, 0x0416, 0x0417, 0x0418, 0x0419, 0x041A, 0x041B, 0x041C,
      0x041D, 0x041E, 0x041F, 0x0420, 0x0421, 0x0422, 0x0423, 0x0424, 0x0425, 0x0426, 0x0427,
      0x0428, 0x0429, 0x042A, 0x042B, 0x042C, 0x042D, 0x042E, 0x042F, 0x0430, 0x0431, 0x0432,
      0x0433, 0x0434, 0x0435, 0x0436, 0x0437, 0x0438, 0x0439, 0x043A, 0x043B, 0x043C, 0x043D,
      0x043E, 0x043F, 0x0440, 0x0441, 0x0442, 0x0443, 0x0444, 0x0445, 0x0446, 0x0447, 0x0448,
      0x0449, 0x044A, 0x044B, 0x044C, 0x044D, 0x044E, 0x044F};
  std::string out;
  out.reserve(bytes.size() * 2);
  for (char b : bytes) {
    unsigned char c = static_cast<unsigned char>(b);
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      utf8_append(out, kHigh[c - 0x80]);
    }
  }
  return out;
}

std::string format_amount(long long denars) {
  std::string digits = std::to_string(denars < 0 ? -denars : denars);
  std::string out;
  out.reserve(digits.size() + digits.size() / 3 + 1);
  if (denars < 0) out.push_back('-');
  std::size_t lead = digits.size() % 3;
  if (lead == 0) lead = 3;
  out.append(digits, 0, lead);
  for (std::size_t i = lead; i < digits.size(); i += 3) {
    out.push_back('.');
    out.append(digits, i, 3);
  }
  return out;
}

std::string format_double(double v) {
  char buf[400];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find('e') == std::string::npos && s.find('E') == std::string::npos) return s;
  // Shortest form went scientific (1e+08); downstream consumers reparse
  // these lexicals with the plain decimal grammar, so rewrite as fixed.
  auto fixed = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  if (fixed.ec != std::errc()) return s;
  std::string f(buf, fixed.ptr);
  if (f.find('.') != std::string::npos) {
    while (f.back() == '0') f.pop_back();
    if (f.back() == '.') f.pop_back();
  }
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof()) fail(Errc::io, "error while reading file: " + path);
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out.good()) fail(Errc::io, "error while writing file: " + path);
}

}  // namespace procgraph
