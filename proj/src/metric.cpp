#include "tc/metric.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "tc/executor.hpp"
#include "tc/expr.hpp"
#include "tc/planner.hpp"

namespace tc {

MetricTensor invert_metric(const Tensor& g) {
  if (g.rank() != 2 || g.extent(0) != g.extent(1))
    throw std::invalid_argument("metric must be a square rank-2 tensor");
  const std::int64_t n = g.extent(0);

  double scale = 0.0, asym = 0.0;
  for (std::int64_t j = 0; j < n; ++j)
    for (std::int64_t i = 0; i < n; ++i) {
      const double a = g.data()[i + j * n];
      scale = std::max(scale, std::abs(a));
      asym = std::max(asym, std::abs(a - g.data()[j + i * n]));
    }
  if (asym > 1e-10 * std::max(1.0, scale))
    throw std::invalid_argument("metric is not symmetric");

  Eigen::Map<const Eigen::MatrixXd> G(g.data(), n, n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  if (!lu.isInvertible()) throw std::invalid_argument("metric is singular");
  Eigen::MatrixXd inv = lu.inverse();
  const double cond = G.cwiseAbs().colwise().sum().maxCoeff() *
                      inv.cwiseAbs().colwise().sum().maxCoeff();
  if (!(cond < 1e12)) throw std::invalid_argument("metric is numerically singular");

  MetricTensor m;
  m.dimension = n;
  m.g = Tensor::zeros({n, n}, {Variance::Down, Variance::Down}, "g");
  m.g_inv = Tensor::zeros({n, n}, {Variance::Up, Variance::Up}, "ginv");
  for (std::int64_t i = 0; i < n * n; ++i) m.g.data()[i] = g.data()[i];
  Eigen::Map<Eigen::MatrixXd>(m.g_inv.data(), n, n) = inv;
  return m;
}

MetricTensor spherical_metric(double r, double theta) {
  const double st = std::sin(theta);
  if (!(r > 0.0) || st == 0.0)
    throw std::invalid_argument("spherical metric is singular at r=0 or sin(theta)=0");
  MetricTensor m;
  m.dimension = 3;
  m.g = Tensor::zeros({3, 3}, {Variance::Down, Variance::Down}, "g");
  m.g_inv = Tensor::zeros({3, 3}, {Variance::Up, Variance::Up}, "ginv");
  const double d[3] = {1.0, r * r, r * r * st * st};
  for (int i = 0; i < 3; ++i) {
    m.g.data()[i + 3 * i] = d[i];
    m.g_inv.data()[i + 3 * i] = 1.0 / d[i];
  }
  return m;
}

namespace {

Tensor apply_metric(const Tensor& t, int mode, const Tensor& g2,
                    Variance required, const KernelBackend& backend) {
  if (mode < 0 || mode >= t.rank()) throw std::invalid_argument("mode out of range");
  if (t.variance(mode) != required)
    throw std::invalid_argument(std::string("mode is already ") +
                                (required == Variance::Up ? "lowered" : "raised"));
  if (t.extent(mode) != g2.extent(0))
    throw std::invalid_argument("mode extent does not match metric dimension");

  // out[..., x', ...] = t[..., x, ...] * g2[x, x'], same mode order.
  ContractionSpec spec;
  spec.left.name = t.name().empty() ? "t" : t.name();
  spec.right.name = "g";
  spec.output.name = spec.left.name;
  const Variance flipped = required == Variance::Up ? Variance::Down : Variance::Up;
  for (int m = 0; m < t.rank(); ++m) {
    const std::string label = "i" + std::to_string(m);
    spec.left.indices.push_back({label, t.variance(m)});
    if (m == mode) spec.output.indices.push_back({label + "p", flipped});
    else spec.output.indices.push_back({label, t.variance(m)});
  }
  const std::string contracted = "i" + std::to_string(mode);
  spec.right.indices.push_back({contracted, g2.variance(0)});
  spec.right.indices.push_back({contracted + "p", g2.variance(1)});

  const auto v = validate(spec, t, g2);
  const auto p = plan(v);
  auto [result, stats] = execute(p, v, t, g2, backend);
  return std::move(result);
}

}  // namespace

Tensor lower_index(const Tensor& t, int mode, const MetricTensor& m,
                   const KernelBackend& backend) {
  return apply_metric(t, mode, m.g, Variance::Up, backend);
}

Tensor raise_index(const Tensor& t, int mode, const MetricTensor& m,
                   const KernelBackend& backend) {
  return apply_metric(t, mode, m.g_inv, Variance::Down, backend);
}

}  // namespace tc
