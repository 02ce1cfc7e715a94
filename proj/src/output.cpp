#include "dynlap/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "dynlap/errors.hpp"

namespace dynlap {

namespace {

std::string fmt(const char* spec, double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// Qualitative palette.
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRecord> records) {
  os << "scheme,degree,h,eigval_rel_err,eigspace_err\n";
  for (const auto& r : records)
    os << r.scheme << "," << r.degree << "," << fmt("%.10g", r.h) << ","
       << fmt("%.10e", r.eigval_rel_err) << "," << fmt("%.10e", r.eigspace_err) << "\n";
}

void write_partition_csv(std::ostream& os, const Partition& p) {
  os << "x,y,label\n";
  for (size_t i = 0; i < p.sample_points.size(); ++i)
    os << fmt("%.10g", p.sample_points[i].x()) << "," << fmt("%.10g", p.sample_points[i].y())
       << "," << p.labels[i] << "\n";
}

std::string loglog_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, std::span<const PlotSeries> series) {
  constexpr double W = 640, H = 480, L = 80, R = 230, T = 40, B = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0.1, xmax = 1.0, ymin = 0.1, ymax = 1.0;
  const double lx0 = std::floor(std::log10(xmin)), lx1 = std::max(lx0 + 1, std::ceil(std::log10(xmax)));
  const double ly0 = std::floor(std::log10(ymin)), ly1 = std::max(ly0 + 1, std::ceil(std::log10(ymax)));
  const double pw = W - L - R, ph = H - T - B;
  const auto px = [&](double x) { return L + (std::log10(x) - lx0) / (lx1 - lx0) * pw; };
  const auto py = [&](double y) { return T + ph - (std::log10(y) - ly0) / (ly1 - ly0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << L + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = lx0; e <= lx1 + 0.5; e += 1.0) {
    const double x = L + (e - lx0) / (lx1 - lx0) * pw;
    os << "<line x1=\"" << x << "\" y1=\"" << T + ph << "\" x2=\"" << x << "\" y2=\"" << T + ph + 5
       << "\" stroke=\"black\"/><text x=\"" << x << "\" y=\"" << T + ph + 20
       << "\" text-anchor=\"middle\">1e" << static_cast<int>(e) << "</text>\n";
  }
  for (double e = ly0; e <= ly1 + 0.5; e += 1.0) {
    const double y = T + ph - (e - ly0) / (ly1 - ly0) * ph;
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << y << "\" x2=\"" << L << "\" y2=\"" << y
       << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\">1e" << static_cast<int>(e) << "</text>\n";
  }
  os << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << T + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << T + ph / 2 << ")\">" << escape(y_label) << "</text>\n";

  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::ostringstream pts;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      pts << px(s.x[i]) << "," << py(s.y[i]) << " ";
      os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\""
         << color << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"5,4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
    const double ly = T + 10 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 35 << "\" y2=\""
       << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"5,4\"" : "") << "/><text x=\"" << W - R + 40
       << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string partition_svg(const std::string& title, const Partition& p, int nx, int ny) {
  if (static_cast<size_t>(nx) * ny != p.labels.size())
    throw ContractViolation("partition size does not match the sample grid");
  constexpr double cell = 4.0, top = 30.0;
  const double W = nx * cell, H = ny * cell + top;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\" shape-rendering=\"crispEdges\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << escape(title)
     << "</text>\n";
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int label = p.labels[static_cast<size_t>(j) * nx + i];
      os << "<rect x=\"" << i * cell << "\" y=\"" << top + (ny - 1 - j) * cell << "\" width=\""
         << cell << "\" height=\"" << cell << "\" fill=\"" << kColors[label % std::size(kColors)]
         << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw ConfigError("cannot write '" + path + "'");
}

}  // namespace dynlap
