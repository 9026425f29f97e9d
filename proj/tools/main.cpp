#include <string>
#include <vector>

#include "eqmest/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return eqmest::parse_and_dispatch(args);
}
