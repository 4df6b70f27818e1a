#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace curvwork::cli {

struct Column {
  std::string name;
  std::string unit;  // empty for dimensionless
};

/// Numeric table with a `#` metadata header, written as CSV.
class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<Column> columns);

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  const std::vector<std::pair<std::string, std::string>>& metadata() const { return meta_; }

  /// Throws DimensionMismatch if the row width differs from the header.
  void add_row(std::vector<double> row);
  /// Replaces an existing key or appends a new one; order is preserved.
  void set_meta(const std::string& key, const std::string& value);
  std::string meta(const std::string& key) const;

  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;

  std::string to_csv() const;
  void write_csv(const std::string& path) const;

 private:
  std::vector<Column> columns_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::pair<std::string, std::string>> meta_;
};

/// Shortest round-trip decimal form.
std::string format_number(double value);

struct PlotSpec {
  std::string title;
  std::string x;
  std::vector<std::string> y;
  bool surface = false;  // splot x:y:z[0]
};

/// Plain gnuplot commands that plot `csv_file` as described by `spec`.
std::string gnuplot_script(const ResultTable& table, const std::string& csv_file, const PlotSpec& spec);

}  // namespace curvwork::cli
