#include <iostream>
#include <string>
#include <vector>

#include "chtwin/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return chtwin::dispatch(args, std::cout, std::cerr);
}
