#include <string>
#include <vector>

#include "srde/cli.hpp"

int main(int argc, char** argv) {
  return srde::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
