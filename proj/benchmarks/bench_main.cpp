#include <benchmark/benchmark.h>

// The distro libbenchmark_main.a carries LTO bytecode from another GCC
// release, so the entry point is built here.
BENCHMARK_MAIN();
