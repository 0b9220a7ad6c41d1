#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cspf {

// Minimal comma-separated table with a header row. Fields are never quoted
// in the formats handled here.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws std::runtime_error naming the column
  // when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace cspf
