#include "commands.hpp"

int main(int argc, char** argv) {
  return saltplan::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
