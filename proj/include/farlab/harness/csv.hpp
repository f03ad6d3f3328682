#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace farlab::harness {

/// First line of every CSV the harness writes.
inline constexpr const char* kCsvSchemaLine = "# farcuriosity-lab v1";

/// Shortest round-trip decimal form.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
  bool has_column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
  std::vector<std::string> strings(const std::string& name) const;
  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

/// Writes the schema line, the header and the rows. Throws IoError.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Reads a table written by write_csv (comment lines skipped). Throws IoError.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace farlab::harness
