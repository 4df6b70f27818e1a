#include "curvwork/cli/table.hpp"

#include "curvwork/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace curvwork::cli {

ResultTable::ResultTable(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw ValidationError("ResultTable: need at least one column");
}

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns_.size()) {
    throw DimensionMismatch("ResultTable: row has " + std::to_string(row.size()) + " values, header has " +
                            std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row));
}

void ResultTable::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : meta_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta_.emplace_back(key, value);
}

std::string ResultTable::meta(const std::string& key) const {
  for (const auto& [k, v] : meta_) {
    if (k == key) return v;
  }
  return {};
}

std::size_t ResultTable::column_index(const std::string& name) const {
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    if (columns_[k].name == name) return k;
  }
  throw ValidationError("ResultTable: no column '" + name + "'");
}

std::vector<double> ResultTable::column(const std::string& name) const {
  const std::size_t k = column_index(name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[k]);
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string ResultTable::to_csv() const {
  std::ostringstream out;
  for (const auto& [k, v] : meta_) out << "# " << k << ": " << v << '\n';
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    if (k) out << ',';
    out << columns_[k].name;
    if (!columns_[k].unit.empty()) out << " [" << columns_[k].unit << ']';
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      out << format_number(row[k]);
    }
    out << '\n';
  }
  return out.str();
}

void ResultTable::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << to_csv();
  if (!out) throw ValidationError("write failed for '" + path + "'");
}

std::string gnuplot_script(const ResultTable& table, const std::string& csv_file, const PlotSpec& spec) {
  std::ostringstream s;
  s << "set datafile separator ','\n";
  s << "set datafile commentschars '#'\n";
  s << "set key autotitle columnheader\n";
  s << "set title '" << spec.title << "'\n";
  const std::size_t x = table.column_index(spec.x) + 1;
  s << "set xlabel '" << spec.x << "'\n";
  if (spec.surface) {
    const std::size_t y = table.column_index(spec.y.at(0)) + 1;
    const std::size_t z = table.column_index(spec.y.at(1)) + 1;
    s << "set ylabel '" << spec.y[0] << "'\n";
    s << "set pm3d map\n";
    s << "splot '" << csv_file << "' using " << x << ':' << y << ':' << z << " with pm3d\n";
    return s.str();
  }
  s << "plot ";
  for (std::size_t k = 0; k < spec.y.size(); ++k) {
    if (k) s << ", \\\n     ";
    s << "'" << csv_file << "' using " << x << ':' << table.column_index(spec.y[k]) + 1 << " with linespoints";
  }
  s << "\n";
  return s.str();
}

}  // namespace curvwork::cli
