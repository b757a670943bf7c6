#include "gridsoc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridsoc {

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns.size()) {
    throw std::invalid_argument("table: row has " + std::to_string(cells.size()) +
                                " cells, expected " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(cells));
}

std::string fmt_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string fmt_int(long long value) { return std::to_string(value); }

namespace {

bool needs_quoting(const std::string& cell) {
  return cell.find_first_of(",\"\r\n") != std::string::npos;
}

std::string quote(const std::string& cell) {
  if (!needs_quoting(cell)) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void emit_csv(const Table& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << quote(table.columns[i]);
  }
  out << "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << quote(row[i]);
    }
    out << "\r\n";
  }
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

Table read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  const auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  const auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // consumed with the following newline
    } else if (c == '\n') {
      end_record();
    } else {
      field += c;
    }
    ++i;
  }
  if (!field.empty() || !record.empty()) end_record();

  Table table;
  if (records.empty()) return table;
  table.columns = records.front();
  for (std::size_t r = 1; r < records.size(); ++r) table.rows.push_back(records[r]);
  return table;
}

namespace {

constexpr int kPaneWidth = 640;
constexpr int kPaneHeight = 420;
constexpr int kMarginLeft = 70, kMarginRight = 24, kMarginTop = 40, kMarginBottom = 52;

const char* kPalette[] = {"#1f6fb4", "#d9542b", "#3a9648", "#8550a1", "#b4a11f",
                          "#59b6c8", "#c54e7f", "#6b6b6b", "#2b3fd9", "#8a5a2b",
                          "#4ba18a", "#a14b4b"};

struct AxisTicks {
  std::vector<double> at;
  double lo = 0.0, hi = 1.0;
};

AxisTicks nice_ticks(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1.0, std::abs(lo)) * 0.5;
    lo -= pad;
    hi += pad;
  }
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) {
      step = mag * mult;
      break;
    }
  }
  AxisTicks ticks;
  ticks.lo = std::floor(lo / step) * step;
  ticks.hi = std::ceil(hi / step) * step;
  for (double v = ticks.lo; v <= ticks.hi + 0.5 * step; v += step) ticks.at.push_back(v);
  return ticks;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void render_pane(std::ostream& out, const PlotSpec& plot, int y_offset) {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const PlotSeries& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!any) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        any = true;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
    if (s.style == PlotSeries::Style::Bars) ymin = std::min(ymin, 0.0);
  }
  const AxisTicks xt = nice_ticks(xmin, xmax);
  const AxisTicks yt = nice_ticks(ymin, ymax);

  const double plot_w = kPaneWidth - kMarginLeft - kMarginRight;
  const double plot_h = kPaneHeight - kMarginTop - kMarginBottom;
  const auto sx = [&](double v) {
    return kMarginLeft + (v - xt.lo) / (xt.hi - xt.lo) * plot_w;
  };
  const auto sy = [&](double v) {
    return y_offset + kMarginTop + plot_h - (v - yt.lo) / (yt.hi - yt.lo) * plot_h;
  };

  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << y_offset + kMarginTop << "\" width=\""
      << plot_w << "\" height=\"" << plot_h << "\" fill=\"white\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << kPaneWidth / 2 << "\" y=\"" << y_offset + 20
      << "\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(plot.title) << "</text>\n";

  for (double v : xt.at) {
    const double px = sx(v);
    out << "<line x1=\"" << px << "\" y1=\"" << sy(yt.lo) << "\" x2=\"" << px << "\" y2=\""
        << sy(yt.lo) + 4 << "\" stroke=\"#333\"/>\n";
    out << "<line x1=\"" << px << "\" y1=\"" << sy(yt.lo) << "\" x2=\"" << px << "\" y2=\""
        << sy(yt.hi) << "\" stroke=\"#eee\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << sy(yt.lo) + 18 << "\" text-anchor=\"middle\">"
        << fmt_tick(v) << "</text>\n";
  }
  for (double v : yt.at) {
    const double py = sy(v);
    out << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << py << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << py << "\" stroke=\"#333\"/>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << py << "\" x2=\"" << sx(xt.hi)
        << "\" y2=\"" << py << "\" stroke=\"#eee\"/>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
        << fmt_tick(v) << "</text>\n";
  }
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\""
      << y_offset + kPaneHeight - 12 << "\" text-anchor=\"middle\">" << escape_xml(plot.xlabel)
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << y_offset + kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << y_offset + kMarginTop + plot_h / 2 << ")\">" << escape_xml(plot.ylabel) << "</text>\n";

  int color = 0;
  for (const PlotSeries& s : plot.series) {
    const char* stroke = kPalette[color % (sizeof kPalette / sizeof kPalette[0])];
    ++color;
    if (s.style == PlotSeries::Style::Bars) {
      const double width = s.x.size() > 1 ? 0.7 * plot_w / ((xt.hi - xt.lo) /
                                            std::max(1e-12, (s.x[1] - s.x[0])))
                                          : 20.0;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double x0 = sx(s.x[i]) - width / 2;
        const double y_zero = sy(std::max(yt.lo, 0.0));
        const double y_val = sy(s.y[i]);
        out << "<rect x=\"" << x0 << "\" y=\"" << std::min(y_zero, y_val) << "\" width=\""
            << width << "\" height=\"" << std::abs(y_zero - y_val) << "\" fill=\"" << stroke
            << "\" fill-opacity=\"0.7\"/>\n";
      }
    } else if (s.style == PlotSeries::Style::Line) {
      out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.6\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << sx(s.x[i]) << "," << sy(s.y[i]) << " ";
      }
      out << "\"/>\n";
    }
    if (s.style != PlotSeries::Style::Bars) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i])
            << "\" r=\"2.5\" fill=\"" << stroke << "\"/>\n";
      }
    }
  }

  // legend
  int entry = 0;
  for (const PlotSeries& s : plot.series) {
    if (s.label.empty()) {
      ++entry;
      continue;
    }
    const char* stroke = kPalette[entry % (sizeof kPalette / sizeof kPalette[0])];
    const double ly = y_offset + kMarginTop + 14 + 16 * entry;
    out << "<line x1=\"" << kPaneWidth - kMarginRight - 120 << "\" y1=\"" << ly << "\" x2=\""
        << kPaneWidth - kMarginRight - 100 << "\" y2=\"" << ly << "\" stroke=\"" << stroke
        << "\" stroke-width=\"3\"/>\n";
    out << "<text x=\"" << kPaneWidth - kMarginRight - 94 << "\" y=\"" << ly + 4 << "\">"
        << escape_xml(s.label) << "</text>\n";
    ++entry;
  }
  out << "</g>\n";
}

}  // namespace

void emit_svg_panes(const std::vector<PlotSpec>& panes, const std::string& path) {
  if (panes.empty()) throw std::invalid_argument("emit_svg: no panes");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_svg: cannot open " + path);
  const int height = kPaneHeight * static_cast<int>(panes.size());
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPaneWidth << "\" height=\""
      << height << "\" viewBox=\"0 0 " << kPaneWidth << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panes.size(); ++i) {
    render_pane(out, panes[i], static_cast<int>(i) * kPaneHeight);
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("emit_svg: write failed for " + path);
}

void emit_svg(const PlotSpec& plot, const std::string& path) { emit_svg_panes({plot}, path); }

}  // namespace gridsoc
