#pragma once

// RFC 4180 style CSV: header row, ',' separator, '.' decimal point, LF line
// ends. Doubles use the shortest representation that round-trips, so output
// is byte-stable for identical values.

#include <array>
#include <charconv>
#include <cmath>
#include <concepts>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace voronoi {

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), res.ptr);
}

/// Quotes a field containing a separator, quote or line break, doubling
/// embedded quotes.
inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct CsvCell {
  std::string text;
  CsvCell(double x) : text(format_double(x)) {}  // NOLINT
  CsvCell(std::string s) : text(csv_escape(s)) {}  // NOLINT
  CsvCell(std::string_view s) : text(csv_escape(s)) {}  // NOLINT
  CsvCell(const char* s) : text(csv_escape(s)) {}  // NOLINT
  CsvCell(bool b) : text(b ? "true" : "false") {}  // NOLINT
  template <std::integral T>
    requires(!std::same_as<T, bool>)
  CsvCell(T v) : text(std::to_string(v)) {}  // NOLINT
};

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names) {
    if (columns_ != 0) throw std::logic_error("csv: header written twice");
    if (names.empty()) throw std::invalid_argument("csv: empty header");
    columns_ = names.size();
    std::vector<CsvCell> cells(names.begin(), names.end());
    emit(cells);
  }

  void row(const std::vector<CsvCell>& cells) {
    if (columns_ == 0) throw std::logic_error("csv: row before header");
    if (cells.size() != columns_) {
      throw std::invalid_argument("csv: row has " + std::to_string(cells.size()) + " fields, header has " +
                                  std::to_string(columns_));
    }
    emit(cells);
  }

  void row(std::initializer_list<CsvCell> cells) { row(std::vector<CsvCell>(cells)); }

  [[nodiscard]] std::size_t columns() const { return columns_; }

 private:
  void emit(const std::vector<CsvCell>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i].text;
    }
    out_ << '\n';
  }

  std::ostream& out_;
  std::size_t columns_ = 0;
};

}  // namespace voronoi
