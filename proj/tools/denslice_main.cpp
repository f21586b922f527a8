#include <string>
#include <vector>

#include "denslice/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return denslice::run_cli(args);
}
