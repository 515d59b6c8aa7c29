#include "slelab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace slelab {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("CsvTable: header is mandatory");
}

void CsvTable::add_row(std::initializer_list<Cell> cells) {
  std::vector<std::string> row;
  row.reserve(cells.size());
  for (const auto& cell : cells) {
    if (const auto* d = std::get_if<double>(&cell)) {
      row.push_back(format_double(*d));
    } else if (const auto* i = std::get_if<long long>(&cell)) {
      row.push_back(std::to_string(*i));
    } else {
      row.push_back(std::get<std::string>(cell));
    }
  }
  add_row(std::move(row));
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CsvTable: row width mismatch");
  for (const auto& c : cells) {
    if (c.find_first_of(",\n\"") != std::string::npos) {
      throw std::invalid_argument("CsvTable: cells may not contain separators or quotes");
    }
  }
  rows_.push_back(std::move(cells));
}

std::size_t CsvTable::column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw std::out_of_range("CsvTable: no column " + std::string(name));
  return static_cast<std::size_t>(it - header_.begin());
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& s = rows_.at(row).at(col);
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("CsvTable: not a number: " + s);
  }
  return v;
}

namespace {

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace

std::string CsvTable::to_string() const {
  std::string out = join(header_) + '\n';
  for (const auto& row : rows_) out += join(row) + '\n';
  return out;
}

CsvTable CsvTable::parse(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  if (lines.empty()) throw std::invalid_argument("CsvTable::parse: missing header");
  CsvTable table(split(lines.front()));
  for (std::size_t i = 1; i < lines.size(); ++i) table.add_row(split(lines[i]));
  return table;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double x = log ? std::log10(v) : v;
    return (x - lo) / (hi - lo);
  }
};

Axis make_axis(const std::vector<double>& values, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0.0)) continue;
    const double x = log ? std::log10(v) : v;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  a.lo = log ? std::floor(lo) : lo - pad;
  a.hi = log ? std::ceil(hi) : hi + pad;
  if (a.hi - a.lo < 1e-12) a.hi = a.lo + 1.0;
  return a;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v, bool log) {
  std::ostringstream ss;
  ss.precision(4);
  if (log) {
    ss << "1e" << static_cast<int>(std::lround(v));
  } else {
    ss << v;
  }
  return ss.str();
}

}  // namespace

std::string svg_plot(std::span<const PlotSeries> series, const PlotOptions& opt) {
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#17becf"};
  const double left = 70, right = 20, top = 40, bottom = 55;
  double pw = opt.width - left - right;
  double ph = opt.height - top - bottom;

  std::vector<double> xs, ys;
  for (const auto& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  Axis ax = make_axis(xs, opt.log_x);
  Axis ay = make_axis(ys, opt.log_y);
  if (opt.equal_aspect && !opt.log_x && !opt.log_y) {
    // Same units per pixel on both axes; widen whichever range is short.
    const double sx = (ax.hi - ax.lo) / pw, sy = (ay.hi - ay.lo) / ph;
    if (sx > sy) {
      const double mid = 0.5 * (ay.lo + ay.hi);
      ay.lo = mid - 0.5 * sx * ph;
      ay.hi = mid + 0.5 * sx * ph;
    } else {
      const double mid = 0.5 * (ax.lo + ax.hi);
      ax.lo = mid - 0.5 * sy * pw;
      ax.hi = mid + 0.5 * sy * pw;
    }
  }
  auto px = [&](double v) { return left + ax.map(v) * pw; };
  auto py = [&](double v) { return top + (1.0 - ay.map(v)) * ph; };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << opt.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << escape(opt.title) << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  auto ticks = [](const Axis& a) {
    std::vector<double> t;
    if (a.log) {
      for (double e = a.lo; e <= a.hi + 1e-9; e += 1.0) t.push_back(e);
    } else {
      const double span = a.hi - a.lo;
      const double raw = span / 5.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      double step = mag;
      for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) {
          step = m * mag;
          break;
        }
      }
      for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-12; v += step) t.push_back(v);
    }
    return t;
  };
  for (double t : ticks(ax)) {
    const double x = left + (t - ax.lo) / (ax.hi - ax.lo) * pw;
    svg << "<line x1=\"" << x << "\" y1=\"" << top + ph << "\" x2=\"" << x << "\" y2=\""
        << top + ph + 5 << "\" stroke=\"black\"/>";
    svg << "<text x=\"" << x << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(t, ax.log) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = top + (1.0 - (t - ay.lo) / (ay.hi - ay.lo)) * ph;
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
        << "\" stroke=\"black\"/>";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(t, ay.log) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << opt.height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(opt.x_label)
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 16 "
      << top + ph / 2 << ")\">" << escape(opt.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = palette[k % std::size(palette)];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if ((opt.log_x && s.x[i] <= 0) || (opt.log_y && s.y[i] <= 0)) continue;
      svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    svg << "\"/>\n";
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        if ((opt.log_x && s.x[i] <= 0) || (opt.log_y && s.y[i] <= 0)) continue;
        svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\""
            << colour << "\"/>\n";
      }
    }
    svg << "<text x=\"" << left + 10 << "\" y=\"" << top + 16 + 16 * static_cast<double>(k)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << colour << "\">"
        << escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace slelab
