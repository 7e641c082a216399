#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace dtc::io {

/// Round-trippable, locale-independent text for a double ("%.17g").
std::string fmt(double value);

/// A header plus rows of already-formatted cells. Comma separated, LF line
/// endings, no quoting (no cell produced here contains a comma).
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

  /// Index of a named column; MissingColumnError if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  void add_row(std::vector<std::string> cells);

  template <class... Ts>
  void add(const Ts&... values) {
    add_row({cell(values)...});
  }

  double number(std::size_t row, std::string_view name) const;
  const std::string& text(std::size_t row, std::string_view name) const;

  void write(std::ostream& out) const;
  std::string str() const;
  void save(const std::string& path) const;

  static Table parse(std::istream& in);
  static Table load(const std::string& path);

  static std::string cell(double v) { return fmt(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  template <class T, std::enable_if_t<std::is_integral_v<T>, int> = 0>
  static std::string cell(T v) {
    return std::to_string(v);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes text to a file, throwing on I/O failure.
void write_file(const std::string& path, const std::string& contents);

}  // namespace dtc::io
