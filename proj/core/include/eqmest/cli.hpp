#pragma once

#include <map>
#include <string>
#include <vector>

#include "eqmest/harness.hpp"

namespace eqmest {

// Raised for bad invocations (unknown flags, malformed option values,
// unknown config keys); maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat `key = value` configuration files: one pair per line, '#' comments,
// blank lines ignored. Keys are namespaced (e.g. sweep.n_processes).
std::map<std::string, std::string> read_config_file(const std::string& path);

// Applies config-file entries to a sweep configuration; unknown keys and
// unparsable values raise UsageError.
void apply_config_entries(SweepConfig& cfg,
                          const std::map<std::string, std::string>& entries);

// Parses argv (program name excluded) and runs the selected subcommand.
// Exit codes: 0 success, 1 usage error, 2 runtime error.
int parse_and_dispatch(const std::vector<std::string>& args);

}  // namespace eqmest
