#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tc/tensor.hpp"

namespace tc {

struct parse_error : std::runtime_error {
  parse_error(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

struct IndexRef {
  std::string label;
  Variance var = Variance::Up;
  bool operator==(const IndexRef&) const = default;
};

struct TensorExpr {
  std::string name;
  std::vector<IndexRef> indices;
  bool operator==(const TensorExpr&) const = default;
};

/// Parsed two-operand Einstein contraction `out = left * right`. A label
/// appearing in both operands is contracted; a label appearing once must
/// appear in the output.
struct ContractionSpec {
  TensorExpr output;
  TensorExpr left;
  TensorExpr right;
  bool positional = false;  // variance pairing rules skipped when true
  bool operator==(const ContractionSpec&) const = default;
};

/// Grammar (ASCII):
///   contraction := tensor `=` tensor `*` tensor
///   tensor      := NAME `[` index (`,` index)* `]` | NAME `[]`
///   index       := (`+` | `-`) NAME
/// `+` marks an upper (contravariant) index, `-` a lower (covariant) one.
/// In positional mode the opposite-variance requirement for contracted
/// labels is skipped; the exactly-once pairing rule always holds.
ContractionSpec parse(const std::string& expr, bool positional = false);

/// Canonical rendering; parse(unparse(s)) == s.
std::string unparse(const ContractionSpec& spec);

struct LabelInfo {
  std::string label;
  std::int64_t extent = 0;
  bool contracted = false;
  int left_mode = -1;   // -1 when absent from that operand
  int right_mode = -1;
  int output_mode = -1;
};

/// A spec bound to concrete operands: extents resolved per label, contracted
/// extents checked for agreement, and the free-index counts
/// delta = rank - p computed for both sides.
struct ValidatedContraction {
  ContractionSpec spec;
  std::vector<LabelInfo> labels;      // left modes in order, then right-only labels
  std::vector<int> contracted;        // indices into labels, by left mode order
  std::vector<int> left_free;         // indices into labels, by left mode order
  std::vector<int> right_free;        // indices into labels, by right mode order
  int p = 0;
  int delta_left = 0;
  int delta_right = 0;

  int left_rank() const { return static_cast<int>(spec.left.indices.size()); }
  int right_rank() const { return static_cast<int>(spec.right.indices.size()); }
  int output_rank() const { return static_cast<int>(spec.output.indices.size()); }
  const LabelInfo& label_at_left_mode(int mode) const;
  const LabelInfo& label_at_right_mode(int mode) const;
  int label_index(const std::string& label) const;
  std::vector<std::int64_t> output_extents() const;
  std::vector<Variance> output_variance() const;
};

ValidatedContraction validate(const ContractionSpec& spec, const Tensor& left,
                              const Tensor& right);

/// 2 * prod(free extents) * prod(contracted extents): one multiply and one
/// add per elementary term.
std::int64_t flop_count(const ValidatedContraction& v);

}  // namespace tc
