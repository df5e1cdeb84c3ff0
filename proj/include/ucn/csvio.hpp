#pragma once

// Minimal CSV reading/writing. Fields in this project never contain commas,
// quotes, or newlines, so no quoting is implemented; the writer rejects
// fields that would need it.

#include <string>
#include <vector>

namespace ucn {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column; throws naming the column when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  void save(const std::string& path) const;
  std::string to_text() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace ucn
