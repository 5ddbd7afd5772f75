#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gpaml {

// A parsed CSV file: column names plus string cells, row-major.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t ncol() const { return columns.size(); }
  std::size_t nrow() const { return rows.size(); }
  // Index of a named column, or nullopt.
  std::optional<std::size_t> find_column(std::string_view name) const;
};

// Reads a comma-separated file. With has_header the first line supplies the
// column names; otherwise `names` must give them (or they default to c0..cK).
// Ragged rows are reported with their 1-based line number.
CsvTable read_csv_table(const std::filesystem::path& path, bool has_header,
                        const std::vector<std::string>& names = {});

// Strict numeric parse; on failure reports the 1-based row/column position.
double parse_double_cell(const std::string& cell, std::size_t row,
                         std::size_t col);
std::int64_t parse_int_cell(const std::string& cell, std::size_t row,
                            std::size_t col);

// Shortest round-trip decimal representation. All CSV output goes through
// this so that re-running a command reproduces files byte for byte.
std::string format_double(double v);

// Line-oriented CSV writer; callers pass pre-formatted cells.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

// FNV-1a digest of a file's bytes, hex-encoded; used in run manifests.
std::string file_digest_hex(const std::filesystem::path& path);

}  // namespace gpaml
