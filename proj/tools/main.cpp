#include <string>
#include <vector>

#include "o2orl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return o2orl::run_cli(args);
}
