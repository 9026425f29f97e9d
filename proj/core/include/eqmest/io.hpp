#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqmest {

class CsvParseError : public std::runtime_error {
 public:
  CsvParseError(const std::string& message, int line)
      : std::runtime_error(message + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Series file format: one value per line, a blank line is a missing
// observation, lines starting with '#' are ignored.
std::vector<std::optional<double>> read_series_csv(const std::string& path);

void write_series_csv(const std::string& path,
                      const std::vector<std::optional<double>>& values,
                      const std::string& comment = "");

// All numeric output is printed with 12 significant digits so runs can be
// diffed byte for byte.
std::string format_double(double value);

}  // namespace eqmest
