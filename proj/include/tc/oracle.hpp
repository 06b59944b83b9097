#pragma once

#include <cstdint>
#include <stdexcept>

#include "tc/expr.hpp"
#include "tc/tensor.hpp"

namespace tc {

struct resource_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleStats {
  std::int64_t multiply_adds = 0;
};

/// Direct nested summation in a fixed lexicographic order: for every output
/// coordinate, sums left*right over the full Cartesian range of contracted
/// labels. Positional semantics (variance ignored after validation).
/// Deterministic and single-threaded; refuses jobs above the work cap.
Tensor contract_naive(const ValidatedContraction& v, const Tensor& left,
                      const Tensor& right, std::int64_t work_cap = 1000000000,
                      OracleStats* stats = nullptr);

}  // namespace tc
