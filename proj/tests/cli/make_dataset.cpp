// Writes a small synthetic image tree: make_dataset <dir> <count> <seed>
#include <cstdio>
#include <cstdlib>

#include "support/fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: make_dataset <dir> <count> <seed>\n");
    return 1;
  }
  fixture::write_dataset(argv[1], std::strtoul(argv[2], nullptr, 10),
                         std::strtoull(argv[3], nullptr, 10), 232);
  return 0;
}
