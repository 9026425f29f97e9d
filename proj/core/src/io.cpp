#include "eqmest/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace eqmest {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin])))
    ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1])))
    --end;
  return s.substr(begin, end - begin);
}

}  // namespace

std::vector<std::optional<double>> read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open series file: " + path);

  std::vector<std::optional<double>> values;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string cell = trimmed(line);
    if (!cell.empty() && cell[0] == '#') continue;
    if (cell.empty()) {
      values.emplace_back(std::nullopt);
      continue;
    }
    char* end = nullptr;
    const double value = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || !std::isfinite(value))
      throw CsvParseError("malformed series value '" + cell + "'", line_number);
    values.emplace_back(value);
  }
  return values;
}

void write_series_csv(const std::string& path,
                      const std::vector<std::optional<double>>& values,
                      const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  if (!comment.empty()) out << "# " << comment << "\n";
  for (const auto& value : values) {
    if (value.has_value()) out << format_double(*value);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

}  // namespace eqmest
