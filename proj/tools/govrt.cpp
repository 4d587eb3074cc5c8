#include <iostream>

#include "govrt/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  const govrt::CommandResult r = govrt::dispatch(args);
  std::cout << r.output;
  if (!r.error_message.empty()) std::cerr << r.error_message << '\n';
  return r.exit_code;
}
