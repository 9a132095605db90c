#include <string>
#include <vector>

#include "embinv/cli.hpp"

int main(int argc, char** argv) {
  return embinv::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
