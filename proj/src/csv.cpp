#include "gpaml/csv.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "gpaml/error.hpp"
#include "gpaml/rng.hpp"

namespace gpaml {

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

CsvTable read_csv_table(const std::filesystem::path& path, bool has_header,
                        const std::vector<std::string>& names) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());

  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (table.columns.empty()) {
      if (has_header) {
        for (auto& c : cells) table.columns.push_back(trimmed(c));
        continue;
      }
      if (!names.empty()) {
        if (names.size() != cells.size()) {
          throw DataError("column name list has " + std::to_string(names.size()) +
                          " entries but file " + path.string() + " has " +
                          std::to_string(cells.size()) + " columns");
        }
        table.columns = names;
      } else {
        for (std::size_t i = 0; i < cells.size(); ++i)
          table.columns.push_back("c" + std::to_string(i));
      }
    }
    if (cells.size() != table.columns.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected " + std::to_string(table.columns.size()) +
                      " cells, found " + std::to_string(cells.size()));
    }
    for (auto& c : cells) c = trimmed(c);
    table.rows.push_back(std::move(cells));
  }
  if (table.columns.empty() && !names.empty()) table.columns = names;
  return table;
}

double parse_double_cell(const std::string& cell, std::size_t row,
                         std::size_t col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw DataError("non-numeric cell '" + cell + "' at row " +
                    std::to_string(row) + ", column " + std::to_string(col));
  }
  return v;
}

std::int64_t parse_int_cell(const std::string& cell, std::size_t row,
                            std::size_t col) {
  std::int64_t v = 0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw DataError("non-integer cell '" + cell + "' at row " +
                    std::to_string(row) + ", column " + std::to_string(col));
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("format_double failed");
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw Error("cannot open for writing: " + path.string());
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.flush();
  if (!out_) throw Error("write failed: " + path_.string());
  out_.close();
}

std::string file_digest_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for digest: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  const std::uint64_t h = fnv1a64(bytes);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gpaml
