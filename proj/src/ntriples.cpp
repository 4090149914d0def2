#include <algorithm>
#include <cctype>
#include <cstdio>

#include "procgraph/errors.hpp"
#include "procgraph/rdf.hpp"
#include "procgraph/text.hpp"

namespace procgraph {

namespace {

void append_u_escape(std::string& out, char32_t cp) {
  char buf[16];
  if (cp <= 0xFFFF) {
    std::snprintf(buf, sizeof(buf), "\\u%04X", static_cast<unsigned>(cp));
  } else {
    std::snprintf(buf, sizeof(buf), "\\U%08X", static_cast<unsigned>(cp));
  }
  out += buf;
}

std::string escape_literal(std::string_view lexical) {
  std::string out;
  out.reserve(lexical.size() + 2);
  for (char c : lexical) {
    unsigned char u = static_cast<unsigned char>(c);
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (u < 0x20) {
          append_u_escape(out, u);
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

std::string escape_iri(std::string_view iri) {
  // Graph terms are validated, so only defensive control escaping is left.
  std::string out;
  out.reserve(iri.size());
  for (char c : iri) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u < 0x21 && u < 0x80) {
      append_u_escape(out, u);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  [[noreturn]] void error(const std::string& what) const {
    fail(Errc::ntriples_syntax, "line " + std::to_string(line_no_) + ", column " +
                                    std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
  }

  bool done() const { return pos_ >= line_.size(); }
  char peek() const { return line_[pos_]; }

  Term parse_iri() {
    if (done() || line_[pos_] != '<') error("expected '<'");
    ++pos_;
    std::string iri;
    while (true) {
      if (done()) error("unterminated IRI");
      char c = line_[pos_++];
      if (c == '>') break;
      if (c == '\\') {
        iri += parse_u_escape();
      } else {
        iri.push_back(c);
      }
    }
    if (!is_valid_iri(iri)) error("invalid IRI: <" + iri + ">");
    return Term::make_iri(std::move(iri));
  }

  Term parse_literal() {
    if (done() || line_[pos_] != '"') error("expected '\"'");
    ++pos_;
    std::string lexical;
    while (true) {
      if (done()) error("unterminated literal");
      char c = line_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (done()) error("dangling escape");
        char e = line_[pos_];
        switch (e) {
          case 't': lexical.push_back('\t'); ++pos_; break;
          case 'b': lexical.push_back('\b'); ++pos_; break;
          case 'n': lexical.push_back('\n'); ++pos_; break;
          case 'r': lexical.push_back('\r'); ++pos_; break;
          case 'f': lexical.push_back('\f'); ++pos_; break;
          case '"': lexical.push_back('"'); ++pos_; break;
          case '\'': lexical.push_back('\''); ++pos_; break;
          case '\\': lexical.push_back('\\'); ++pos_; break;
          case 'u':
          case 'U':
            lexical += parse_u_escape();
            break;
          default:
            error(std::string("unknown escape \\") + e);
        }
      } else {
        lexical.push_back(c);
      }
    }
    Datatype dt = Datatype::string;
    if (pos_ + 1 < line_.size() && line_[pos_] == '^' && line_[pos_ + 1] == '^') {
      pos_ += 2;
      Term dt_iri = parse_iri();
      auto known = datatype_from_iri(dt_iri.text);
      if (!known) error("unsupported literal datatype: <" + dt_iri.text + ">");
      dt = *known;
    } else if (!done() && line_[pos_] == '@') {
      error("language-tagged literals are not supported");
    }
    return Term::make_literal(std::move(lexical), dt);
  }

  void expect_dot() {
    skip_ws();
    if (done() || line_[pos_] != '.') error("expected terminating '.'");
    ++pos_;
    skip_ws();
    if (!done() && line_[pos_] != '#') error("trailing content after '.'");
  }

 private:
  // Reads \uXXXX or \UXXXXXXXX (pos_ is at the escape letter).
  std::string parse_u_escape() {
    char kind = line_[pos_];
    if (kind != 'u' && kind != 'U') error(std::string("unknown escape \\") + kind);
    std::size_t digits = kind == 'u' ? 4 : 8;
    ++pos_;
    if (pos_ + digits > line_.size()) error("truncated \\u escape");
    char32_t cp = 0;
    for (std::size_t i = 0; i < digits; ++i) {
      char c = line_[pos_ + i];
      cp <<= 4;
      if (c >= '0' && c <= '9') cp |= static_cast<char32_t>(c - '0');
      else if (c >= 'a' && c <= 'f') cp |= static_cast<char32_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') cp |= static_cast<char32_t>(c - 'A' + 10);
      else error("bad hex digit in \\u escape");
    }
    pos_ += digits;
    std::string out;
    utf8_append(out, cp);
    return out;
  }

  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string ntriples_render_term(const Term& term) {
  if (term.is_iri()) return "<" + escape_iri(term.text) + ">";
  std::string out = "\"" + escape_literal(term.text) + "\"";
  if (term.datatype != Datatype::string) {
    out += "^^<";
    out += datatype_iri(term.datatype);
    out += ">";
  }
  return out;
}

std::string ntriples_render(const Triple& triple) {
  return ntriples_render_term(triple.subject) + " " + ntriples_render_term(triple.predicate) +
         " " + ntriples_render_term(triple.object) + " .";
}

std::string serialize_ntriples(const Graph& graph) {
  std::vector<std::string> lines;
  lines.reserve(graph.size());
  for (const Triple& t : graph.all_triples()) lines.push_back(ntriples_render(t));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& line : lines) {
    out += line;
    out.push_back('\n');
  }
  return out;
}

Graph parse_ntriples(std::string_view text) {
  Graph graph;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    if (pos == text.size() && line_no > 0) break;
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        eol == std::string_view::npos ? text.substr(pos) : text.substr(pos, eol - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    // Skip blank lines and comment lines.
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;

    LineParser parser(line, line_no);
    parser.skip_ws();
    Term subject = parser.parse_iri();
    parser.skip_ws();
    Term predicate = parser.parse_iri();
    parser.skip_ws();
    Term object;
    if (!parser.done() && parser.peek() == '<') {
      object = parser.parse_iri();
    } else if (!parser.done() && parser.peek() == '"') {
      object = parser.parse_literal();
    } else if (!parser.done() && parser.peek() == '_') {
      parser.error("blank nodes are not supported");
    } else {
      parser.error("expected IRI or literal object");
    }
    parser.expect_dot();
    graph.insert(Triple{std::move(subject), std::move(predicate), std::move(object)});
  }
  return graph;
}

}  // namespace procgraph
