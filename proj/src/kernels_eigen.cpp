#include <Eigen/Dense>
#include <stdexcept>

#include "tc/kernels.hpp"

namespace tc {

namespace {

using MatMap = Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
using MutMatMap = Eigen::Map<Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
using VecMap = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;
using MutVecMap = Eigen::Map<Eigen::VectorXd, 0, Eigen::InnerStride<>>;

class EigenBackend final : public KernelBackend {
 public:
  const std::string& name() const override {
    static const std::string n = "external";
    return n;
  }

  void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n,
            std::int64_t k, double alpha, const double* a, std::int64_t lda,
            const double* b, std::int64_t ldb, double beta, double* c,
            std::int64_t ldc) const override {
    if (lda < std::max<std::int64_t>(1, trans_a ? k : m))
      throw std::invalid_argument("gemm: lda below row count");
    if (ldb < std::max<std::int64_t>(1, trans_b ? n : k))
      throw std::invalid_argument("gemm: ldb below row count");
    if (ldc < std::max<std::int64_t>(1, m))
      throw std::invalid_argument("gemm: ldc below row count");
    MatMap A(a, trans_a ? k : m, trans_a ? m : k, Eigen::OuterStride<>(lda));
    MatMap B(b, trans_b ? n : k, trans_b ? k : n, Eigen::OuterStride<>(ldb));
    MutMatMap C(c, m, n, Eigen::OuterStride<>(ldc));
    Eigen::MatrixXd prod(m, n);
    if (trans_a) {
      if (trans_b) prod.noalias() = A.transpose() * B.transpose();
      else prod.noalias() = A.transpose() * B;
    } else {
      if (trans_b) prod.noalias() = A * B.transpose();
      else prod.noalias() = A * B;
    }
    if (beta == 0.0) C = alpha * prod;
    else C = alpha * prod + beta * C;
  }

  void gemv(bool trans, std::int64_t m, std::int64_t n, double alpha,
            const double* a, std::int64_t lda, const double* x,
            std::int64_t incx, double beta, double* y,
            std::int64_t incy) const override {
    MatMap A(a, m, n, Eigen::OuterStride<>(lda));
    const std::int64_t xlen = trans ? m : n;
    const std::int64_t ylen = trans ? n : m;
    VecMap X(x, xlen, Eigen::InnerStride<>(incx));
    MutVecMap Y(y, ylen, Eigen::InnerStride<>(incy));
    Eigen::VectorXd prod(ylen);
    if (trans) prod.noalias() = A.transpose() * X;
    else prod.noalias() = A * X;
    if (beta == 0.0) Y = alpha * prod;
    else Y = alpha * prod + beta * Y;
  }

  void ger(std::int64_t m, std::int64_t n, double alpha, const double* x,
           std::int64_t incx, const double* y, std::int64_t incy, double* a,
           std::int64_t lda) const override {
    MutMatMap A(a, m, n, Eigen::OuterStride<>(lda));
    VecMap X(x, m, Eigen::InnerStride<>(incx));
    VecMap Y(y, n, Eigen::InnerStride<>(incy));
    A.noalias() += alpha * X * Y.transpose();
  }

  double dot(std::int64_t k, const double* x, std::int64_t incx, const double* y,
             std::int64_t incy) const override {
    VecMap X(x, k, Eigen::InnerStride<>(incx));
    VecMap Y(y, k, Eigen::InnerStride<>(incy));
    return X.dot(Y);
  }
};

}  // namespace

std::unique_ptr<KernelBackend> make_eigen_backend() {
  return std::make_unique<EigenBackend>();
}

}  // namespace tc
