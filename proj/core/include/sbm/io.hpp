#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sbm::io {

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t>;

// Shortest representation that round-trips; "inf"/"-inf"/"nan" otherwise.
std::string format_double(double v);

class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<Cell> row);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  const std::vector<Cell>& row(std::size_t i) const { return rows_[i]; }
  // Column by name, numeric cells as double (strings parsed).
  std::vector<double> column(const std::string& name) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

CsvTable read_csv(const std::filesystem::path& path);

// Write to a sibling temporary file and rename over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Shared constants mirrored for figure tooling: c, 1/pi, 2c^2, 1/(4 pi^2), ...
std::string constants_json();

}  // namespace sbm::io
