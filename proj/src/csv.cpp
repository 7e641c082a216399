#include "dtc/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dtc/errors.hpp"

namespace dtc::io {

std::string fmt(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw MissingColumnError("missing column '" + std::string(name) + "'");
}

bool Table::has_column(std::string_view name) const {
  for (const auto& h : header_) {
    if (h == name) return true;
  }
  return false;
}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw DimensionError("row has " + std::to_string(cells.size()) + " cells, header has " +
                         std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
}

double Table::number(std::size_t row, std::string_view name) const {
  const std::string& t = text(row, name);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != t.size() || t.empty()) {
    throw ArgumentError("row " + std::to_string(row + 1) + ", column '" + std::string(name) + "': not a number: '" +
                        t + "'");
  }
  return v;
}

const std::string& Table::text(std::size_t row, std::string_view name) const {
  if (row >= rows_.size()) throw IndexError("row " + std::to_string(row) + " out of range");
  return rows_[row][column(name)];
}

void Table::write(std::ostream& out) const {
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

std::string Table::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

void Table::save(const std::string& path) const { write_file(path, str()); }

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Table Table::parse(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Table t(split(line));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header_.size()) {
      throw ArgumentError("CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                          " fields, expected " + std::to_string(t.header_.size()));
    }
    t.rows_.push_back(std::move(cells));
  }
  return t;
}

Table Table::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  return parse(in);
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw ArgumentError("write failed for '" + path + "'");
}

}  // namespace dtc::io
