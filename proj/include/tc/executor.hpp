#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tc/expr.hpp"
#include "tc/kernels.hpp"
#include "tc/planner.hpp"
#include "tc/tensor.hpp"

namespace tc {

struct ExecutionStats {
  std::int64_t kernel_calls = 0;
  std::int64_t packed_bytes = 0;  // operand slices copied into contiguous buffers
  std::int64_t staged_bytes = 0;  // output slices staged through packed buffers
  std::int64_t flops = 0;
  double wall_seconds = 0.0;
};

/// Drives the plan's loop nest over concrete operands: materializes slices
/// (aliasing parent memory where the stride-1 fast path applies, packing
/// otherwise), issues kernel calls with accumulation over sliced contracted
/// labels, and copies staged output slices back out. Iterations over free
/// sliced labels run on `workers` threads; output slices are disjoint, so a
/// run is bit-reproducible for any worker count.
std::pair<Tensor, ExecutionStats> execute(const ExecutionPlan& plan,
                                          const ValidatedContraction& v,
                                          const Tensor& left, const Tensor& right,
                                          const KernelBackend& backend,
                                          int workers = 1);

struct SlicingRun {
  SlicingVector s_left;
  SlicingVector s_right;
  KernelKind kernel = KernelKind::Elementwise;
  std::uint64_t result_hash = 0;
  ExecutionStats stats;
  Tensor result;
};

/// Executes every enumerated slicing of the contraction; the combined work
/// must stay under `work_cap` multiply-adds.
std::vector<SlicingRun> execute_all_slicings(const ValidatedContraction& v,
                                             const Tensor& left,
                                             const Tensor& right,
                                             const KernelBackend& backend,
                                             std::int64_t work_cap = 1000000000);

std::uint64_t tensor_hash(const Tensor& t);

/// max_i |a_i - b_i| / max(1, max_i |b_i|)
double max_rel_error(const Tensor& a, const Tensor& b);

}  // namespace tc
