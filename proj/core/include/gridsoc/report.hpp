#pragma once

#include <string>
#include <vector>

namespace gridsoc {

// Tabular output: cells are preformatted strings; fmt_real renders doubles
// with 17 significant digits so emitted CSVs round-trip bit-exactly.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
};

std::string fmt_real(double value);
std::string fmt_int(long long value);

void emit_csv(const Table& table, const std::string& path);
Table read_csv(const std::string& path);

struct PlotSeries {
  enum class Style { Line, Scatter, Bars };
  std::string label;
  std::vector<double> x, y;
  Style style = Style::Line;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  std::vector<PlotSeries> series;
};

// Self-contained SVG line/scatter/bar chart with axes and a legend.
void emit_svg(const PlotSpec& plot, const std::string& path);
// One pane per spec, stacked vertically in a single SVG.
void emit_svg_panes(const std::vector<PlotSpec>& panes, const std::string& path);

}  // namespace gridsoc
