#pragma once

// Plain CSV used for all numeric results: one header row, comma separated,
// numbers in scientific notation with 16 significant digits.

#include <filesystem>
#include <string>
#include <vector>

namespace superlattice::csv {

class Writer {
 public:
  explicit Writer(std::vector<std::string> header);

  // Numeric row; must match the header width.
  void row(const std::vector<double>& values);
  // Mixed row written verbatim (already formatted cells).
  void text_row(const std::vector<std::string>& cells);

  void save(const std::filesystem::path& path) const;

 private:
  std::size_t width_;
  std::string buffer_;
};

std::string number(double value);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Throws std::runtime_error on I/O failure.
Table read(const std::filesystem::path& path);

}  // namespace superlattice::csv
