#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ddac/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  ddac::cli::Context ctx{std::cout, std::cerr};
  ctx.color = std::getenv("DDAC_NO_COLOR") == nullptr && isatty(fileno(stdout)) != 0;
  int status = ddac::cli::run(args, ctx);
  std::cout.flush();
  return status;
}
