// Acceptance suite: one pass/fail line per criterion. Placeholder until the
// pipeline stages land.
#include <cstdio>

int main() {
    std::printf("acceptance suite not yet implemented\n");
    return 1;
}
