#include <stdexcept>
#include <vector>

#include "tc/kernels.hpp"

namespace tc {

namespace {

constexpr std::int64_t kBlock = 64;

void check_gemm_args(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n,
                     std::int64_t k, std::int64_t lda, std::int64_t ldb,
                     std::int64_t ldc) {
  if (m < 0 || n < 0 || k < 0) throw std::invalid_argument("gemm: negative dimension");
  const std::int64_t a_rows = trans_a ? k : m;
  const std::int64_t b_rows = trans_b ? n : k;
  if (lda < std::max<std::int64_t>(1, a_rows))
    throw std::invalid_argument("gemm: lda below row count");
  if (ldb < std::max<std::int64_t>(1, b_rows))
    throw std::invalid_argument("gemm: ldb below row count");
  if (ldc < std::max<std::int64_t>(1, m))
    throw std::invalid_argument("gemm: ldc below row count");
}

class ReferenceBackend final : public KernelBackend {
 public:
  const std::string& name() const override {
    static const std::string n = "reference";
    return n;
  }

  void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n,
            std::int64_t k, double alpha, const double* a, std::int64_t lda,
            const double* b, std::int64_t ldb, double beta, double* c,
            std::int64_t ldc) const override {
    check_gemm_args(trans_a, trans_b, m, n, k, lda, ldb, ldc);
    if (beta == 0.0) {
      for (std::int64_t j = 0; j < n; ++j)
        for (std::int64_t i = 0; i < m; ++i) c[i + j * ldc] = 0.0;
    } else if (beta != 1.0) {
      for (std::int64_t j = 0; j < n; ++j)
        for (std::int64_t i = 0; i < m; ++i) c[i + j * ldc] *= beta;
    }
    if (alpha == 0.0 || k == 0 || m == 0 || n == 0) return;

    // Blocked loops with packed A and B panels, so the inner update streams
    // contiguous memory for every transpose combination. The pack buffers are
    // reused across calls; loop-over-GEMM drivers issue many small calls.
    constexpr std::int64_t kNC = 256;
    thread_local std::vector<double> apack(static_cast<std::size_t>(kBlock * kBlock));
    thread_local std::vector<double> bpack(static_cast<std::size_t>(kBlock * kNC));
    for (std::int64_t jj = 0; jj < n; jj += kNC) {
      const std::int64_t jb = std::min(kNC, n - jj);
      for (std::int64_t kk = 0; kk < k; kk += kBlock) {
        const std::int64_t kb = std::min(kBlock, k - kk);
        for (std::int64_t j = 0; j < jb; ++j)
          for (std::int64_t p = 0; p < kb; ++p)
            bpack[p + j * kb] = trans_b ? b[(jj + j) + (kk + p) * ldb]
                                        : b[(kk + p) + (jj + j) * ldb];
        for (std::int64_t ii = 0; ii < m; ii += kBlock) {
          const std::int64_t ib = std::min(kBlock, m - ii);
          for (std::int64_t p = 0; p < kb; ++p)
            for (std::int64_t i = 0; i < ib; ++i)
              apack[i + p * ib] = trans_a ? a[(kk + p) + (ii + i) * lda]
                                          : a[(ii + i) + (kk + p) * lda];
          for (std::int64_t j = 0; j < jb; ++j) {
            double* ccol = c + ii + (jj + j) * ldc;
            const double* bcol = bpack.data() + j * kb;
            for (std::int64_t p = 0; p < kb; ++p) {
              const double bv = alpha * bcol[p];
              const double* acol = apack.data() + p * ib;
              for (std::int64_t i = 0; i < ib; ++i) ccol[i] += acol[i] * bv;
            }
          }
        }
      }
    }
  }

  void gemv(bool trans, std::int64_t m, std::int64_t n, double alpha,
            const double* a, std::int64_t lda, const double* x,
            std::int64_t incx, double beta, double* y,
            std::int64_t incy) const override {
    if (m < 0 || n < 0) throw std::invalid_argument("gemv: negative dimension");
    if (lda < std::max<std::int64_t>(1, m))
      throw std::invalid_argument("gemv: lda below row count");
    const std::int64_t ylen = trans ? n : m;
    const std::int64_t xlen = trans ? m : n;
    if (beta == 0.0) {
      for (std::int64_t i = 0; i < ylen; ++i) y[i * incy] = 0.0;
    } else if (beta != 1.0) {
      for (std::int64_t i = 0; i < ylen; ++i) y[i * incy] *= beta;
    }
    if (alpha == 0.0 || xlen == 0 || ylen == 0) return;
    if (!trans) {
      // y += alpha * A x, one contiguous column of A per x element.
      for (std::int64_t j = 0; j < n; ++j) {
        const double xv = alpha * x[j * incx];
        const double* col = a + j * lda;
        if (incy == 1) {
          for (std::int64_t i = 0; i < m; ++i) y[i] += col[i] * xv;
        } else {
          for (std::int64_t i = 0; i < m; ++i) y[i * incy] += col[i] * xv;
        }
      }
    } else {
      // y_j += alpha * (column j of A) . x
      for (std::int64_t j = 0; j < n; ++j) {
        const double* col = a + j * lda;
        double acc = 0.0;
        if (incx == 1) {
          for (std::int64_t i = 0; i < m; ++i) acc += col[i] * x[i];
        } else {
          for (std::int64_t i = 0; i < m; ++i) acc += col[i] * x[i * incx];
        }
        y[j * incy] += alpha * acc;
      }
    }
  }

  void ger(std::int64_t m, std::int64_t n, double alpha, const double* x,
           std::int64_t incx, const double* y, std::int64_t incy, double* a,
           std::int64_t lda) const override {
    if (m < 0 || n < 0) throw std::invalid_argument("ger: negative dimension");
    if (lda < std::max<std::int64_t>(1, m))
      throw std::invalid_argument("ger: lda below row count");
    if (alpha == 0.0) return;
    for (std::int64_t j = 0; j < n; ++j) {
      const double yv = alpha * y[j * incy];
      double* col = a + j * lda;
      if (incx == 1) {
        for (std::int64_t i = 0; i < m; ++i) col[i] += x[i] * yv;
      } else {
        for (std::int64_t i = 0; i < m; ++i) col[i] += x[i * incx] * yv;
      }
    }
  }

  double dot(std::int64_t k, const double* x, std::int64_t incx, const double* y,
             std::int64_t incy) const override {
    double acc = 0.0;
    if (incx == 1 && incy == 1) {
      for (std::int64_t i = 0; i < k; ++i) acc += x[i] * y[i];
    } else {
      for (std::int64_t i = 0; i < k; ++i) acc += x[i * incx] * y[i * incy];
    }
    return acc;
  }
};

}  // namespace

std::unique_ptr<KernelBackend> make_reference_backend() {
  return std::make_unique<ReferenceBackend>();
}

std::unique_ptr<KernelBackend> make_backend(const std::string& name) {
  if (name == "reference") return make_reference_backend();
  if (name == "external") return make_eigen_backend();
  throw std::invalid_argument("unknown backend '" + name + "'");
}

}  // namespace tc
