#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace tc {

/// The four kernel primitives with standard BLAS semantics: column-major
/// matrices addressed through leading dimensions, strided vectors, real
/// double precision (conjugation degenerates to transposition).
class KernelBackend {
 public:
  virtual ~KernelBackend() = default;

  virtual const std::string& name() const = 0;
  virtual bool supports_transpose() const { return true; }

  /// C <- alpha * op(A) * op(B) + beta * C, with op(A) M x K and op(B) K x N.
  virtual void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n,
                    std::int64_t k, double alpha, const double* a,
                    std::int64_t lda, const double* b, std::int64_t ldb,
                    double beta, double* c, std::int64_t ldc) const = 0;

  /// y <- alpha * op(A) * x + beta * y, with A stored M x N.
  virtual void gemv(bool trans, std::int64_t m, std::int64_t n, double alpha,
                    const double* a, std::int64_t lda, const double* x,
                    std::int64_t incx, double beta, double* y,
                    std::int64_t incy) const = 0;

  /// A <- alpha * x * y^T + A, with A stored M x N.
  virtual void ger(std::int64_t m, std::int64_t n, double alpha, const double* x,
                   std::int64_t incx, const double* y, std::int64_t incy,
                   double* a, std::int64_t lda) const = 0;

  /// Returns x . y over K elements.
  virtual double dot(std::int64_t k, const double* x, std::int64_t incx,
                     const double* y, std::int64_t incy) const = 0;
};

/// Self-contained cache-blocked loops; no external dependencies.
std::unique_ptr<KernelBackend> make_reference_backend();

/// Adapter over Eigen's optimized dense kernels behind the same contract.
std::unique_ptr<KernelBackend> make_eigen_backend();

/// "reference" or "external".
std::unique_ptr<KernelBackend> make_backend(const std::string& name);

}  // namespace tc
