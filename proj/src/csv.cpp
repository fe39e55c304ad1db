#include "pfl/csv.hpp"

#include <cstdlib>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace pfl {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::size_t CsvTable::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::runtime_error("csv: missing column '" + name + "'");
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const std::size_t k = index_of(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(parse_double(rows[r][k], r + 2));
  return out;
}

std::vector<std::string> CsvTable::text_column(const std::string& name) const {
  const std::size_t k = index_of(name);
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[k]);
  return out;
}

double parse_double(const std::string& field, std::size_t line) {
  // from_chars for double is not available everywhere; strtod with a full-consumption check.
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (field.empty() || end != begin + field.size())
    throw std::runtime_error("csv: line " + std::to_string(line) + ": not a number: '" + field +
                             "'");
  return v;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw std::runtime_error("csv: line " + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw std::runtime_error("csv: empty input");
  return t;
}

}  // namespace pfl
