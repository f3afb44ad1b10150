#include <cstdio>

int main() {
  std::puts("hytegrid: subcommands not wired up yet");
  return 2;
}
