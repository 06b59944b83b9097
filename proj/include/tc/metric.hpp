#pragma once

#include "tc/kernels.hpp"
#include "tc/tensor.hpp"

namespace tc {

/// Symmetric nonsingular rank-2 tensor g (down,down) with its inverse
/// (up,up). g lowers indices, g_inv raises them.
struct MetricTensor {
  Tensor g;
  Tensor g_inv;
  std::int64_t dimension = 0;
};

/// Direct solve; rejects asymmetric (beyond 1e-10) or near-singular input
/// (1-norm condition estimate above 1e12).
MetricTensor invert_metric(const Tensor& g);

/// diag(1, r^2, r^2 sin^2(theta)) with the exact diagonal inverse.
MetricTensor spherical_metric(double r, double theta);

/// Contracts the given up mode against g, flipping it to down variance and
/// leaving every other mode unchanged. Dispatched through the planner and
/// executor as an ordinary two-tensor contraction.
Tensor lower_index(const Tensor& t, int mode, const MetricTensor& m,
                   const KernelBackend& backend);

/// Dual of lower_index, using g_inv.
Tensor raise_index(const Tensor& t, int mode, const MetricTensor& m,
                   const KernelBackend& backend);

}  // namespace tc
