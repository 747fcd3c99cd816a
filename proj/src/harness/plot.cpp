#include "joco/harness/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace joco::harness {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr int kTicks = 5;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                    "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Scale {
  double lo, hi, px_lo, px_hi;
  double operator()(double v) const {
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

}  // namespace

std::string render_svg(const std::string& problem, const std::vector<SummaryRow>& rows) {
  std::map<std::string, std::vector<const SummaryRow*>> series;
  for (const auto& r : rows)
    if (r.problem == problem) series[r.method].push_back(&r);
  if (series.empty()) throw std::invalid_argument("no summary rows for " + problem);

  double x_max = 0.0, y_lo = INFINITY, y_hi = -INFINITY;
  for (auto& [name, pts] : series) {
    std::sort(pts.begin(), pts.end(),
              [](const SummaryRow* a, const SummaryRow* b) { return a->iter < b->iter; });
    for (const SummaryRow* p : pts) {
      x_max = std::max(x_max, static_cast<double>(p->iter));
      y_lo = std::min(y_lo, p->mean - p->sem);
      y_hi = std::max(y_hi, p->mean + p->sem);
    }
  }
  if (!std::isfinite(y_lo) || !std::isfinite(y_hi)) y_lo = -1.0, y_hi = 1.0;
  if (y_hi - y_lo <= 0.0) {
    const double pad = std::max(1.0, std::abs(y_lo) * 0.05);
    y_lo -= pad;
    y_hi += pad;
  } else {
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }
  const Scale sx{0.0, std::max(x_max, 1.0), kLeft, kWidth - kRight};
  const Scale sy{y_lo, y_hi, kHeight - kBottom, kTop};

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
       num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"16\">" + escape(problem) + "</text>\n";

  // Axes, ticks and labels.
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" +
       num(y0) + "\"/>\n";
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" +
       num(y1) + "\"/>\n";
  s += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int t = 0; t <= kTicks; ++t) {
    const double xv = sx.lo + (sx.hi - sx.lo) * t / kTicks;
    const double yv = sy.lo + (sy.hi - sy.lo) * t / kTicks;
    s += "<line x1=\"" + num(sx(xv)) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(sx(xv)) +
         "\" y2=\"" + num(y0 + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(y0 + 18) +
         "\" text-anchor=\"middle\">" + label(xv) + "</text>\n";
    s += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(sy(yv)) + "\" x2=\"" + num(x0) +
         "\" y2=\"" + num(sy(yv)) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(sy(yv) + 4) +
         "\" text-anchor=\"end\">" + label(yv) + "</text>\n";
  }
  s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 12) +
       "\" text-anchor=\"middle\">evaluation</text>\n";
  s += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num((y0 + y1) / 2) + ")\">best f</text>\n";
  s += "</g>\n";

  std::size_t k = 0;
  for (const auto& [name, pts] : series) {
    const std::string color = kPalette[k % std::size(kPalette)];
    std::string band, line;
    for (const SummaryRow* p : pts)
      band += num(sx(static_cast<double>(p->iter))) + "," + num(sy(p->mean + p->sem)) + " ";
    for (auto it = pts.rbegin(); it != pts.rend(); ++it)
      band += num(sx(static_cast<double>((*it)->iter))) + "," + num(sy((*it)->mean - (*it)->sem)) +
              " ";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) line += " ";
      line += num(sx(static_cast<double>(pts[i]->iter))) + "," + num(sy(pts[i]->mean));
    }
    band.pop_back();
    s += "<polygon points=\"" + band + "\" fill=\"" + color +
         "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"1.5\"/>\n";
    const double ly = kTop + 10.0 + 18.0 * static_cast<double>(k);
    s += "<g class=\"legend\"><line x1=\"" + num(x1 + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" +
         num(x1 + 32) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/><text x=\"" + num(x1 + 38) + "\" y=\"" + num(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(name) + "</text></g>\n";
    ++k;
  }
  s += "</svg>\n";
  return s;
}

std::vector<std::filesystem::path> write_plots(const std::vector<SummaryRow>& rows,
                                               const std::filesystem::path& dir) {
  if (rows.empty()) throw std::invalid_argument("empty summary");
  std::vector<std::string> problems;
  for (const auto& r : rows)
    if (std::find(problems.begin(), problems.end(), r.problem) == problems.end())
      problems.push_back(r.problem);
  std::sort(problems.begin(), problems.end());
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  for (const auto& p : problems) {
    out.push_back(dir / (p + ".svg"));
    write_text(out.back(), render_svg(p, rows));
  }
  return out;
}

}  // namespace joco::harness
