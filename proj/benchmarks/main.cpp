#include <benchmark/benchmark.h>

// The distro's prebuilt benchmark_main archive carries LTO bytecode tied to
// its compiler version, so the entry point is built here.
BENCHMARK_MAIN();
