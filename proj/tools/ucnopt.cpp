#include <string>
#include <vector>

#include "ucn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ucn::run_command(args);
}
