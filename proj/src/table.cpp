#include "squash/table.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace squash {

const char* const kUnitsNote =
    "rates and times in s^-1 / s; angles in rad; quadrature variances in units where the vacuum variance is 1/4";

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("Table::add_row: width mismatch in " + title);
  rows.push_back(std::move(row));
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  struct V {
    std::string operator()(double x) const { return format_real(x); }
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return csv_quote(s); }
  };
  return std::visit(V{}, c);
}

nlohmann::json cell_json(const Cell& c) {
  struct V {
    nlohmann::json operator()(double x) const { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }
    nlohmann::json operator()(std::int64_t x) const { return x; }
    nlohmann::json operator()(bool b) const { return b; }
    nlohmann::json operator()(const std::string& s) const { return s; }
  };
  return std::visit(V{}, c);
}

}  // namespace

std::string to_csv(const Table& t) {
  std::ostringstream os;
  if (!t.title.empty()) os << "# " << t.title << "\n";
  os << "# " << kUnitsNote << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << "\n";
  }
  return os.str();
}

std::string to_json(const Table& t) {
  nlohmann::ordered_json j;
  j["title"] = t.title;
  j["units"] = kUnitsNote;
  j["columns"] = t.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r;
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string write_table(const Table& t, const std::string& dir, const std::string& stem, const std::string& format) {
  namespace fs = std::filesystem;
  if (format != "csv" && format != "json") throw std::runtime_error("unknown output format '" + format + "'");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  const std::string path = (fs::path(dir) / (stem + "." + format)).string();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << (format == "csv" ? to_csv(t) : to_json(t));
  f.flush();
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
  return path;
}

}  // namespace squash
