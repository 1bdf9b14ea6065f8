#pragma once

#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace helistab::cli {

using Cell = std::variant<std::string, double, long long>;

// Comma-separated, header row, 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> header);
  void row(const std::vector<Cell>& cells);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::size_t columns_;
  std::ofstream out_;
};

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Column index or -1.
  int column(const std::string& name) const;
};

// Throws std::runtime_error on ragged rows or an empty file.
CsvTable read_csv(const std::string& path);

}  // namespace helistab::cli
