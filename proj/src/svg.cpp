#include <algorithm>
#include <cmath>
#include <cstdio>

#include "procgraph/analytics.hpp"
#include "procgraph/errors.hpp"
#include "procgraph/text.hpp"

namespace procgraph {

namespace {

constexpr double kWidth = 960, kHeight = 540;
constexpr double kLeft = 110, kRight = 40, kTop = 60, kBottom = 80;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string header() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void axes(std::string& out) {
  out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + kPlotH) + "\" x2=\"" +
         num(kLeft + kPlotW) + "\" y2=\"" + num(kTop + kPlotH) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
         "\" y2=\"" + num(kTop + kPlotH) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
}

void title_text(std::string& out, const std::string& title) {
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"30\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"18\">" + xml_escape(title) + "</text>\n";
}

void y_ticks(std::string& out, double y_max) {
  for (int i = 0; i <= 4; ++i) {
    double frac = static_cast<double>(i) / 4.0;
    double y = kTop + kPlotH - frac * kPlotH;
    std::int64_t value = std::llround(frac * y_max);
    out += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(kLeft + kPlotW) + "\" y2=\"" + num(y) +
           "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + num(kLeft - 10) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" +
           format_amount(value) + "</text>\n";
  }
  out += "<text x=\"" + num(kLeft) + "\" y=\"" + num(kTop - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">denars</text>\n";
}

}  // namespace

std::string render_trend_svg(const TrendSeries& series) {
  if (series.points.empty()) fail(Errc::empty_input, "trend series has no points");

  std::int64_t lo_day = series.points.front().date.days_since_epoch();
  std::int64_t hi_day = series.points.back().date.days_since_epoch();
  std::int64_t y_top = 1;
  for (const auto& p : series.points) y_top = std::max(y_top, p.amount);

  auto x_of = [&](const Date& d) {
    if (hi_day == lo_day) return kLeft + kPlotW / 2;
    double frac = static_cast<double>(d.days_since_epoch() - lo_day) /
                  static_cast<double>(hi_day - lo_day);
    return kLeft + frac * kPlotW;
  };
  auto y_of = [&](std::int64_t amount) {
    double frac = static_cast<double>(amount) / static_cast<double>(y_top);
    return kTop + kPlotH - frac * kPlotH;
  };

  std::string out = header();
  title_text(out, "Contract amounts over time: " + series.label);
  y_ticks(out, static_cast<double>(y_top));
  axes(out);

  if (series.points.size() > 1) {
    out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series.points.size(); ++i) {
      if (i) out.push_back(' ');
      out += num(x_of(series.points[i].date)) + "," + num(y_of(series.points[i].amount));
    }
    out += "\"/>\n";
  }
  for (const auto& p : series.points) {
    out += "<circle class=\"pt\" cx=\"" + num(x_of(p.date)) + "\" cy=\"" +
           num(y_of(p.amount)) + "\" r=\"4\" fill=\"#1f77b4\"/>\n";
  }

  // Date labels on up to six of the actual points, evenly spread.
  std::size_t n = series.points.size();
  std::size_t ticks = std::min<std::size_t>(n, 6);
  for (std::size_t t = 0; t < ticks; ++t) {
    std::size_t idx = ticks == 1 ? 0 : t * (n - 1) / (ticks - 1);
    const Date& d = series.points[idx].date;
    double x = x_of(d);
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop + kPlotH) + "\" x2=\"" + num(x) +
           "\" y2=\"" + num(kTop + kPlotH + 5) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + kPlotH + 22) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + d.iso() +
           "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + kPlotW / 2) + "\" y=\"" + num(kHeight - 20) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">date</text>\n";
  out += "</svg>\n";
  return out;
}

std::string render_quarterly_svg(const std::vector<QuarterStats>& rows) {
  if (rows.empty()) fail(Errc::empty_input, "no quarterly rows to draw");

  double y_top = 1.0;
  for (const auto& s : rows) {
    y_top = std::max(y_top, s.mean * static_cast<double>(s.count));
  }

  std::string out = header();
  title_text(out, "Quarterly procurement totals");
  y_ticks(out, y_top);
  axes(out);

  double slot = kPlotW / static_cast<double>(rows.size());
  double bar_w = slot * 0.7;
  // Label every quarter when few, else thin the labels out.
  std::size_t label_step = rows.size() <= 12 ? 1 : (rows.size() + 11) / 12;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i];
    double total = s.mean * static_cast<double>(s.count);
    double h = total / y_top * kPlotH;
    double x = kLeft + slot * static_cast<double>(i) + (slot - bar_w) / 2;
    double y = kTop + kPlotH - h;
    out += "<rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
           num(bar_w) + "\" height=\"" + num(h) + "\" fill=\"#2a7fba\"/>\n";
    if (i % label_step == 0) {
      double cx = x + bar_w / 2;
      out += "<text x=\"" + num(cx) + "\" y=\"" + num(kTop + kPlotH + 22) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
             std::to_string(s.year) + "Q" + std::to_string(s.quarter) + "</text>\n";
    }
  }
  out += "<text x=\"" + num(kLeft + kPlotW / 2) + "\" y=\"" + num(kHeight - 20) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">quarter</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace procgraph
