#include <cstdio>

#include "coxmec/version.hpp"

int main() {
  std::printf("coxmec %s\n", coxmec::kVersion);
  return 0;
}
