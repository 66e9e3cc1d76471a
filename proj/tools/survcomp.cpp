#include <string>
#include <vector>

#include "survcomp/cli/app.hpp"

int main(int argc, char** argv) {
  return survcomp::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
