#include <string>
#include <vector>

#include "batchts/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return batchts::cli_main(args);
}
