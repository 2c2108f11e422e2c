#include <string>
#include <vector>

#include "fiberparc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fiberparc::run_cli(std::move(args));
}
