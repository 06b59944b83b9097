#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tc/expr.hpp"
#include "tc/tensor.hpp"

namespace tc {

enum class ContractionClass { C1, C2, C31, C32 };
std::string to_string(ContractionClass c);

enum class KernelKind { Gemm, CopyGemm, Gemv, CopyGemv, Ger, Dot, Elementwise };
std::string to_string(KernelKind k);
std::optional<KernelKind> kernel_from_string(const std::string& s);

enum class Fallback { None, F1, F2, F3 };
std::string to_string(Fallback f);

/// Outcome of testing a slicing pair against the kernel-mapping requirements:
///   R1  no stride-1 mode of either operand is sliced
///   R2  each operand is sliced along rank-2 of its modes
///   R3  each residual slice has exactly one free and one contracted index,
///       and the two kept contracted indices form a single pair
struct RequirementReport {
  bool r1_ok = false;
  bool r2_ok = false;
  bool r3_ok = false;
  Fallback fallback = Fallback::None;
  KernelKind kernel = KernelKind::Elementwise;
};

struct SlicingOption {
  SlicingVector s_left;
  SlicingVector s_right;
  RequirementReport report;
  std::int64_t kernel_dims_product = 0;  // tie-breaking proxy for kernel size
  bool output_staged = false;  // output slice would lack a stride-1 mode
};

struct LoopLabel {
  int label = -1;  // index into ValidatedContraction::labels
  bool contracted = false;
  std::int64_t extent = 0;
};

/// Assignment of the unsliced labels to kernel roles. Label fields index
/// into ValidatedContraction::labels; -1 means unused for the kernel kind.
struct KernelMap {
  int m_label = -1;
  int n_label = -1;
  int k_label = -1;
  int k2_label = -1;       // second surviving pair of a DOT
  bool a_is_left = true;   // operand supplying the kernel's row dimension
  bool trans_a = false;
  bool trans_b = false;
  bool matrix_is_left = true;  // GEMV only
};

enum class CopyTarget { Left, Right, OutputStage };

struct ExecutionPlan {
  ContractionClass cls = ContractionClass::C32;
  SlicingVector s_left;
  SlicingVector s_right;
  SlicingVector s_output;
  KernelKind kernel = KernelKind::Gemm;
  std::vector<LoopLabel> loop_nest;  // outermost first: free labels, then contracted
  KernelMap kernel_map;
  std::vector<CopyTarget> copies;
  std::int64_t flops = 0;
  std::vector<std::int64_t> label_extents;  // planning-time snapshot, drift check
};

struct kernel_unreachable_error : std::runtime_error {
  kernel_unreachable_error(KernelKind kernel, const std::string& requirement)
      : std::runtime_error("kernel unreachable: " + requirement + " violated"),
        kernel(kernel),
        requirement(requirement) {}
  explicit kernel_unreachable_error(const std::string& msg)
      : std::runtime_error(msg), kernel(KernelKind::Gemm) {}
  KernelKind kernel;
  std::string requirement;
};

/// Delta-based taxonomy. Class 1: no free indices on either side. Class 2:
/// free indices on exactly one side. Class 3: free indices on both sides,
/// split 3.1/3.2 by the contraction status of the two stride-1 labels:
/// 3.1 when they are distinct labels, both contracted, and not contracted
/// against each other; 3.2 otherwise.
ContractionClass classify(const ValidatedContraction& v);

RequirementReport check_requirements(const ValidatedContraction& v,
                                     const SlicingVector& s_left,
                                     const SlicingVector& s_right);

/// All consistent slicing pairs whose residual slices have rank <= 2 on both
/// sides, each annotated, in lexicographic order of the concatenated vectors.
std::vector<SlicingOption> enumerate_slicings(const ValidatedContraction& v);

struct PlanPolicy {
  enum class Mode { Auto, ForceKernel, ForceSlicing };
  Mode mode = Mode::Auto;
  KernelKind kernel = KernelKind::Gemm;
  SlicingVector s_left;
  SlicingVector s_right;

  static PlanPolicy auto_policy() { return {}; }
  static PlanPolicy force_kernel(KernelKind k) {
    PlanPolicy p;
    p.mode = Mode::ForceKernel;
    p.kernel = k;
    return p;
  }
  static PlanPolicy force_slicing(SlicingVector sl, SlicingVector sr) {
    PlanPolicy p;
    p.mode = Mode::ForceSlicing;
    p.s_left = std::move(sl);
    p.s_right = std::move(sr);
    return p;
  }
};

/// Applies the per-class recipe: Class 1 -> DOT over the largest pair with a
/// sum-reduction loop over the rest; Class 2 -> GEMV keeping the largest
/// admissible labels unsliced; Class 3.1 -> COPY+GEMM keeping one operand's
/// stride-1 mode; Class 3.2 -> GEMM with both stride-1 modes unsliced.
/// Ties: maximize the product of the kernel dimensions, then take the
/// lexicographically smallest slicing pair.
ExecutionPlan plan(const ValidatedContraction& v,
                   const PlanPolicy& policy = PlanPolicy::auto_policy());

/// Deterministic line-oriented report consumed by the CLI and golden tests.
std::string render_plan(const ExecutionPlan& p, const ValidatedContraction& v);

/// For class 3.1: an operand mode order that would make the contraction
/// fall in class 3.2, so GEMM applies without copies.
std::optional<std::string> relayout_advice(const ValidatedContraction& v);

}  // namespace tc
