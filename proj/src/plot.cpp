#include "kcorelab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "kcorelab/errors.hpp"

namespace kcl {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end && *end == '\0';
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Ticks {
  double lo, hi;
  std::vector<double> at;
};

Ticks nice_ticks(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  double span = hi - lo;
  double raw = span / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  Ticks t;
  t.lo = std::floor(lo / step) * step;
  t.hi = std::ceil(hi / step) * step;
  for (double v = t.lo; v <= t.hi + 0.5 * step; v += step) t.at.push_back(v);
  return t;
}

}  // namespace

void emit_plot(const std::string& csv_path, const std::string& x_column,
               const std::string& y_column, const std::string& out_path) {
  std::ifstream in(csv_path);
  if (!in) throw_io("cannot open CSV: " + csv_path);

  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw_config("CSV has no header row");
  auto col_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw_config("unknown column: " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  std::size_t xi = col_of(x_column), yi = col_of(y_column);

  std::vector<std::pair<double, double>> pts;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (cells.size() <= std::max(xi, yi)) continue;
    double x, y;
    if (parse_number(cells[xi], x) && parse_number(cells[yi], y))
      pts.emplace_back(x, y);
  }

  const int width = 640, height = 480;
  const int ml = 70, mr = 20, mt = 20, mb = 50;
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
      << "width=\"" << width << "\" height=\"" << height << "\">\n"
      << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  double xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
  if (!pts.empty()) {
    xlo = xhi = pts[0].first;
    ylo = yhi = pts[0].second;
    for (auto& [x, y] : pts) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  Ticks tx = nice_ticks(xlo, xhi), ty = nice_ticks(ylo, yhi);
  auto sx = [&](double v) {
    return ml + (v - tx.lo) / (tx.hi - tx.lo) * (width - ml - mr);
  };
  auto sy = [&](double v) {
    return height - mb - (v - ty.lo) / (ty.hi - ty.lo) * (height - mt - mb);
  };

  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  for (double v : tx.at) {
    double x = sx(v);
    svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << height - mb << "\" x2=\""
        << fmt(x) << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(x) << "\" y=\"" << height - mb + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(v)
        << "</text>\n";
  }
  for (double v : ty.at) {
    double y = sy(v);
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << ml
        << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(y + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 10
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_column
      << "</text>\n";
  svg << "<text x=\"15\" y=\"" << (mt + height - mb) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << (mt + height - mb) / 2 << ")\">" << y_column << "</text>\n";

  if (pts.empty()) {
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height / 2
        << "\" font-size=\"16\" text-anchor=\"middle\">no data</text>\n";
  } else {
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" "
        << "points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) svg << " ";
      svg << fmt(sx(pts[i].first)) << "," << fmt(sy(pts[i].second));
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(out_path);
  if (!out) throw_io("cannot write SVG: " + out_path);
  out << svg.str();
}

}  // namespace kcl
