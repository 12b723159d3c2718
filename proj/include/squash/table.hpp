#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace squash {

using Cell = std::variant<double, std::int64_t, bool, std::string>;

/// Column-named rows; every row has one cell per column.
struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

/// Units header emitted as a comment in CSV and as a field in JSON.
extern const char* const kUnitsNote;

/// 17 significant digits, so the text parses back to the same double.
std::string format_real(double x);

std::string to_csv(const Table& t);
std::string to_json(const Table& t);

/// Writes `<dir>/<stem>.<format>`; creates dir. Throws std::runtime_error naming the path on failure.
std::string write_table(const Table& t, const std::string& dir, const std::string& stem, const std::string& format);

}  // namespace squash
