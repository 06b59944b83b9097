#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tc/planner.hpp"

namespace tc {

/// Benchmark sweep over the built-in experiment shapes (or a custom
/// expression), one row per (contraction, kernel, size). Built-ins:
///   square3d  both 3-mode square contractions, extents = size
///   cc4d      4-mode rectangular pair, short free indices = size,
///             long contracted indices = 10 * size, one free index fixed to 1
///   gr4d      4-mode pair with contracted extents 4, free extents = size
struct BenchConfig {
  std::string experiment = "square3d";  // square3d | cc4d | gr4d | custom
  std::vector<std::int64_t> sizes;
  std::vector<KernelKind> kernels;
  std::string backend = "reference";
  int repetitions = 5;
  std::uint64_t seed = 1;
  std::int64_t mem_cap_bytes = 4000000000;
  bool verify_sample = false;
  int workers = 1;
  std::string custom_expr;
  std::map<std::string, std::int64_t> custom_extents;
};

struct BenchRow {
  std::string experiment;
  std::string expression;
  std::int64_t size = 0;
  std::string kernel;
  std::string backend;
  int repetitions = 0;
  double median_seconds = 0.0;
  double gflops = 0.0;
  std::int64_t packed_bytes = 0;
  bool available = false;
  bool verified_ok = true;  // true when sampling is off or the sample matched
};

std::vector<BenchRow> run_bench(const BenchConfig& config);

/// Columns: experiment, expression, size, kernel, backend, repetitions,
/// median_seconds, gflops, packed_bytes. Unavailable kernels carry NA cells.
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

}  // namespace tc
