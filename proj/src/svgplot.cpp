#include "trajrl/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace trajrl::svgplot {

namespace {

constexpr int kW = 720, kH = 420;
constexpr int kMargin = 56;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b"};

struct Canvas {
  std::ostringstream body;

  std::string finish(const std::string& title) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
       << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
       << "\">\n";
    os << "<rect width=\"" << kW << "\" height=\"" << kH
       << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"15\">"
       << title << "</text>\n";
    os << body.str();
    os << "</svg>\n";
    return os.str();
  }
};

void save(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write svg: " + path);
  os << content;
}

double nice_min(const std::vector<double>& v) {
  return *std::min_element(v.begin(), v.end());
}
double nice_max(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end());
}

void axes(Canvas& c, double x0, double x1, double y0, double y1) {
  c.body << "<line x1=\"" << kMargin << "\" y1=\"" << kH - kMargin
         << "\" x2=\"" << kW - kMargin / 2 << "\" y2=\"" << kH - kMargin
         << "\" stroke=\"black\"/>\n";
  c.body << "<line x1=\"" << kMargin << "\" y1=\"" << kH - kMargin
         << "\" x2=\"" << kMargin << "\" y2=\"" << kMargin / 2
         << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double py = kH - kMargin - (kH - 1.5 * kMargin) * i / 4.0;
    c.body << "<text x=\"" << kMargin - 6 << "\" y=\"" << py + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
              "font-size=\"11\">"
           << std::round(fy * 100) / 100 << "</text>\n";
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double px = kMargin + (kW - 1.5 * kMargin) * i / 4.0;
    c.body << "<text x=\"" << px << "\" y=\"" << kH - kMargin + 16
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
              "font-size=\"11\">"
           << std::round(fx * 100) / 100 << "</text>\n";
  }
}

double px_of(double x, double x0, double x1) {
  const double denom = x1 - x0 == 0 ? 1.0 : x1 - x0;
  return kMargin + (x - x0) / denom * (kW - 1.5 * kMargin);
}
double py_of(double y, double y0, double y1) {
  const double denom = y1 - y0 == 0 ? 1.0 : y1 - y0;
  return kH - kMargin - (y - y0) / denom * (kH - 1.5 * kMargin);
}

void legend(Canvas& c, const std::vector<Series>& series) {
  for (std::size_t s = 0; s < series.size(); ++s) {
    const int y = 40 + 16 * static_cast<int>(s);
    c.body << "<rect x=\"" << kW - 170 << "\" y=\"" << y - 9
           << "\" width=\"12\" height=\"12\" fill=\"" << kColors[s % 6]
           << "\"/>\n";
    c.body << "<text x=\"" << kW - 152 << "\" y=\"" << y + 2
           << "\" font-family=\"sans-serif\" font-size=\"12\">"
           << series[s].first << "</text>\n";
  }
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<Series>& series,
                      const std::vector<int>& markers) {
  if (series.empty()) throw std::invalid_argument("line chart: no series");
  double y0 = 1e300, y1 = -1e300;
  std::size_t n = 0;
  for (const auto& [name, v] : series) {
    if (v.empty()) continue;
    y0 = std::min(y0, nice_min(v));
    y1 = std::max(y1, nice_max(v));
    n = std::max(n, v.size());
  }
  if (y0 == y1) {
    y0 -= 1;
    y1 += 1;
  }
  Canvas c;
  axes(c, 0, static_cast<double>(n > 1 ? n - 1 : 1), y0, y1);
  for (int m : markers) {
    const double px = px_of(m, 0, static_cast<double>(n > 1 ? n - 1 : 1));
    c.body << "<line x1=\"" << px << "\" y1=\"" << kMargin / 2 << "\" x2=\""
           << px << "\" y2=\"" << kH - kMargin
           << "\" stroke=\"#ff9900\" stroke-dasharray=\"3,3\"/>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& v = series[s].second;
    c.body << "<polyline fill=\"none\" stroke=\"" << kColors[s % 6]
           << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < v.size(); ++i)
      c.body << px_of(static_cast<double>(i), 0,
                      static_cast<double>(n > 1 ? n - 1 : 1))
             << ',' << py_of(v[i], y0, y1) << ' ';
    c.body << "\"/>\n";
  }
  legend(c, series);
  save(path, c.finish(title));
}

void write_violin(const std::string& path, const std::string& title,
                  const std::vector<Series>& groups) {
  if (groups.empty()) throw std::invalid_argument("violin: no groups");
  double y0 = 1e300, y1 = -1e300;
  for (const auto& [name, v] : groups) {
    if (v.empty()) continue;
    y0 = std::min(y0, nice_min(v));
    y1 = std::max(y1, nice_max(v));
  }
  if (y0 == y1) {
    y0 -= 1;
    y1 += 1;
  }
  Canvas c;
  axes(c, 0, static_cast<double>(groups.size()), y0, y1);
  const double slot = (kW - 1.5 * kMargin) / groups.size();
  for (std::size_t gidx = 0; gidx < groups.size(); ++gidx) {
    auto v = groups[gidx].second;
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    const double mean =
        std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    const double median = v[v.size() / 2];
    double sd = 0.0;
    for (double x : v) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / std::max<std::size_t>(1, v.size() - 1));
    const double bw =
        std::max(1e-9, 1.06 * sd * std::pow(static_cast<double>(v.size()),
                                            -0.2));
    const double cx = kMargin + slot * (gidx + 0.5);
    // Mirrored kernel density polygon.
    const int steps = 50;
    std::vector<double> dens(steps + 1);
    double dmax = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double y = y0 + (y1 - y0) * i / steps;
      double d = 0.0;
      for (double x : v) {
        const double u = (y - x) / bw;
        d += std::exp(-0.5 * u * u);
      }
      dens[i] = d;
      dmax = std::max(dmax, d);
    }
    const double half = slot * 0.42;
    c.body << "<polygon fill=\"" << kColors[gidx % 6]
           << "\" fill-opacity=\"0.45\" stroke=\"" << kColors[gidx % 6]
           << "\" points=\"";
    for (int i = 0; i <= steps; ++i)
      c.body << cx - half * dens[i] / dmax << ','
             << py_of(y0 + (y1 - y0) * i / steps, y0, y1) << ' ';
    for (int i = steps; i >= 0; --i)
      c.body << cx + half * dens[i] / dmax << ','
             << py_of(y0 + (y1 - y0) * i / steps, y0, y1) << ' ';
    c.body << "\"/>\n";
    // Mean diamond and median line.
    const double my = py_of(mean, y0, y1);
    c.body << "<path d=\"M" << cx << ' ' << my - 5 << " L" << cx + 5 << ' '
           << my << " L" << cx << ' ' << my + 5 << " L" << cx - 5 << ' ' << my
           << " Z\" fill=\"black\"/>\n";
    c.body << "<line x1=\"" << cx - half * 0.6 << "\" y1=\""
           << py_of(median, y0, y1) << "\" x2=\"" << cx + half * 0.6
           << "\" y2=\"" << py_of(median, y0, y1)
           << "\" stroke=\"white\" stroke-width=\"2\"/>\n";
    c.body << "<text x=\"" << cx << "\" y=\"" << kH - kMargin + 30
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
              "font-size=\"12\">"
           << groups[gidx].first << "</text>\n";
  }
  save(path, c.finish(title));
}

void write_cdf(const std::string& path, const std::string& title,
               const std::vector<Series>& groups) {
  if (groups.empty()) throw std::invalid_argument("cdf: no groups");
  double x0 = 1e300, x1 = -1e300;
  for (const auto& [name, v] : groups) {
    if (v.empty()) continue;
    x0 = std::min(x0, nice_min(v));
    x1 = std::max(x1, nice_max(v));
  }
  if (x0 == x1) {
    x0 -= 1;
    x1 += 1;
  }
  Canvas c;
  axes(c, x0, x1, 0, 1);
  for (std::size_t gidx = 0; gidx < groups.size(); ++gidx) {
    auto v = groups[gidx].second;
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    c.body << "<polyline fill=\"none\" stroke=\"" << kColors[gidx % 6]
           << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double frac = static_cast<double>(i + 1) / v.size();
      c.body << px_of(v[i], x0, x1) << ','
             << py_of(static_cast<double>(i) / v.size(), 0, 1) << ' ';
      c.body << px_of(v[i], x0, x1) << ',' << py_of(frac, 0, 1) << ' ';
    }
    c.body << "\"/>\n";
  }
  legend(c, groups);
  save(path, c.finish(title));
}

}  // namespace trajrl::svgplot
