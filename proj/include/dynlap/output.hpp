#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dynlap/analysis.hpp"

namespace dynlap {

/// `scheme,degree,h,eigval_rel_err,eigspace_err`; failed measurements print as `nan`.
void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRecord> records);
/// `x,y,label`.
void write_partition_csv(std::ostream& os, const Partition& partition);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

/// Log-log line plot with decade ticks and a legend.
std::string loglog_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, std::span<const PlotSeries> series);

/// Cell map of a partition sampled on an nx-by-ny grid (row-major, y outer).
std::string partition_svg(const std::string& title, const Partition& partition, int nx, int ny);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace dynlap
