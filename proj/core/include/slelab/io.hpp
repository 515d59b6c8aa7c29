#pragma once

// Plain-text output: CSV tables, self-contained SVG plots, atomic file writes.

#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace slelab {

/// Shortest decimal form that parses back to the same double ("%.17g" is
/// not idempotent under parse/re-emit; this is).
std::string format_double(double x);

/// A CSV table with a mandatory header. Cells are kept as text so that
/// parse -> emit reproduces the input bytes.
class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::initializer_list<Cell> cells);
  void add_row(std::vector<std::string> cells);

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::size_t col) const;

  std::string to_string() const;
  static CsvTable parse(std::string_view text);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes content to a temporary sibling and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "x";
  std::string y_label = "y";
  bool log_x = false;
  bool log_y = false;
  bool equal_aspect = false;
  int width = 640;
  int height = 480;
};

/// A self-contained SVG line plot with axes, ticks and a legend.
std::string svg_plot(std::span<const PlotSeries> series, const PlotOptions& options);

}  // namespace slelab
