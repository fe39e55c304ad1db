#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pfl {

/// Minimal comma-separated table with a header row. No quoting support.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t index_of(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  std::vector<std::string> text_column(const std::string& name) const;
};

/// Throws std::runtime_error naming the line on ragged rows.
CsvTable read_csv(std::istream& in);

double parse_double(const std::string& field, std::size_t line);

}  // namespace pfl
