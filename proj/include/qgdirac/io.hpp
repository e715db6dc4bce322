#pragma once

#include <map>
#include <string>
#include <vector>

#include "qgdirac/metric_graph.hpp"

namespace qgdirac {

// Deterministic CSV writer: fixed scientific formatting, no locale, LF line
// endings.  Rerunning a subcommand with the same config and seed must give
// byte-identical files.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void add_row(const std::vector<std::string>& cells);
  void add_row_numbers(const std::vector<double>& cells);
  void write(const std::string& path) const;
  std::string to_string() const;

  static std::string format_number(double v);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Minimal line-plot SVG: one polyline per series over a common x axis.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<SvgSeries>& series);

void write_manifest(const std::string& path, const std::string& subcommand,
                    const std::map<std::string, std::string>& entries);

void ensure_directory(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace qgdirac
