#include "csv.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace superlattice::csv {

std::string number(double value) { return fmt::format("{:.15e}", value); }

Writer::Writer(std::vector<std::string> header) : width_(header.size()) {
  buffer_ = fmt::format("{}\n", fmt::join(header, ","));
}

void Writer::row(const std::vector<double>& values) {
  if (values.size() != width_) throw std::logic_error("csv row width does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) buffer_ += ',';
    fmt::format_to(std::back_inserter(buffer_), "{:.15e}", values[i]);
  }
  buffer_ += '\n';
}

void Writer::text_row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width does not match the header");
  buffer_ += fmt::format("{}\n", fmt::join(cells, ","));
}

void Writer::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  out << buffer_;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

}  // namespace superlattice::csv
