#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "tc/executor.hpp"
#include "tc/metric.hpp"
#include "tc/oracle.hpp"
#include "tc/tensor_io.hpp"

using namespace tc;

namespace {

const auto kBackend = make_reference_backend();

Tensor diag_metric(std::vector<double> d) {
  const auto n = static_cast<std::int64_t>(d.size());
  Tensor g = Tensor::zeros({n, n}, {Variance::Down, Variance::Down}, "g");
  for (std::int64_t i = 0; i < n; ++i) g.data()[i + n * i] = d[i];
  return g;
}

}  // namespace

TEST_CASE("invert_metric on the identity and a diagonal") {
  const auto id = invert_metric(diag_metric({1, 1, 1}));
  for (int i = 0; i < 3; ++i) CHECK(id.g_inv.at({i, i}) == 1.0);

  const auto m = invert_metric(diag_metric({1, 4, 4}));
  CHECK(m.g_inv.at({0, 0}) == doctest::Approx(1.0));
  CHECK(m.g_inv.at({1, 1}) == doctest::Approx(0.25));
  CHECK(m.g_inv.at({2, 2}) == doctest::Approx(0.25));
  CHECK(m.g_inv.at({0, 1}) == 0.0);
}

TEST_CASE("invert_metric rejects bad input") {
  Tensor g = diag_metric({1, 2, 3});
  g.at({0, 1}) = 0.5;  // break symmetry
  CHECK_THROWS_AS(invert_metric(g), std::invalid_argument);
  CHECK_THROWS_AS(invert_metric(diag_metric({1, 0, 1})), std::invalid_argument);
  CHECK_THROWS_AS(invert_metric(Tensor::zeros({2, 3}, {Variance::Down, Variance::Down})),
                  std::invalid_argument);
  CHECK_THROWS_AS(invert_metric(diag_metric({1.0, 1e-30, 1.0})), std::invalid_argument);
}

TEST_CASE("metric product with its inverse is the identity") {
  const Tensor g = Tensor::from_values(
      {3, 3}, {Variance::Down, Variance::Down},
      {4, 1, 0.5, 1, 3, 0.25, 0.5, 0.25, 2});
  const auto m = invert_metric(g);
  for (std::int64_t i = 0; i < 3; ++i)
    for (std::int64_t j = 0; j < 3; ++j) {
      double acc = 0;
      for (std::int64_t k = 0; k < 3; ++k) acc += m.g.at({i, k}) * m.g_inv.at({k, j});
      CHECK(acc == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
    }
}

TEST_CASE("spherical metric values") {
  const auto id = spherical_metric(1.0, M_PI / 2);
  for (int i = 0; i < 3; ++i) CHECK(id.g.at({i, i}) == doctest::Approx(1.0));

  const auto m = spherical_metric(2.0, M_PI / 2);
  CHECK(m.g.at({0, 0}) == doctest::Approx(1.0));
  CHECK(m.g.at({1, 1}) == doctest::Approx(4.0));
  CHECK(m.g.at({2, 2}) == doctest::Approx(4.0));

  const auto k = spherical_metric(2.0, M_PI / 6);
  CHECK(k.g.at({2, 2}) == doctest::Approx(1.0));  // 4 * (1/2)^2

  CHECK_THROWS_AS(spherical_metric(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(spherical_metric(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("identity metric lowering only relabels variance") {
  const auto m = invert_metric(diag_metric({1, 1, 1}));
  const Tensor t = Tensor::seeded_random({3, 3}, {Variance::Up, Variance::Up}, 3);
  const Tensor low = lower_index(t, 1, m, *kBackend);
  CHECK(low.variance(1) == Variance::Down);
  CHECK(low.variance(0) == Variance::Up);
  for (std::int64_t i = 0; i < t.size(); ++i)
    CHECK(low.data()[i] == doctest::Approx(t.data()[i]).epsilon(1e-14));
}

TEST_CASE("spherical lowering of a vector at r=2, theta=pi/2") {
  const auto m = spherical_metric(2.0, M_PI / 2);
  const Tensor v = Tensor::from_values({3}, {Variance::Up}, {1, 1, 1}, "v");
  const Tensor low = lower_index(v, 0, m, *kBackend);
  CHECK(low.at({0}) == doctest::Approx(1.0));
  CHECK(low.at({1}) == doctest::Approx(4.0));
  CHECK(low.at({2}) == doctest::Approx(4.0));
}

TEST_CASE("lowering both modes of a (2,0)-tensor scales by the diagonal products") {
  const double r = 2.0, th = M_PI / 2;
  const auto m = spherical_metric(r, th);
  const Tensor S = Tensor::seeded_random({3, 3}, {Variance::Up, Variance::Up}, 17, "S");
  const Tensor low = lower_index(lower_index(S, 0, m, *kBackend), 1, m, *kBackend);
  const double d[3] = {1.0, r * r, r * r * std::sin(th) * std::sin(th)};
  for (std::int64_t i = 0; i < 3; ++i)
    for (std::int64_t j = 0; j < 3; ++j)
      CHECK(low.at({i, j}) ==
            doctest::Approx(d[i] * d[j] * S.at({i, j})).epsilon(1e-12));
  // the corner entry picks up r^4 sin^4(theta)
  CHECK(low.at({2, 2}) ==
        doctest::Approx(std::pow(r, 4) * std::pow(std::sin(th), 4) * S.at({2, 2})));
}

TEST_CASE("raise after lower is the identity") {
  const auto m = invert_metric(Tensor::from_values(
      {3, 3}, {Variance::Down, Variance::Down},
      {4, 1, 0.5, 1, 3, 0.25, 0.5, 0.25, 2}));
  const Tensor t =
      Tensor::seeded_random({3, 4, 3}, {Variance::Up, Variance::Down, Variance::Up}, 5);
  for (const int mode : {0, 2}) {
    const Tensor back =
        raise_index(lower_index(t, mode, m, *kBackend), mode, m, *kBackend);
    CHECK(max_rel_error(back, t) <= 1e-10);
  }
}

TEST_CASE("diag(1,4,4) raising undoes the lowering example") {
  const auto m = invert_metric(diag_metric({1, 4, 4}));
  const Tensor low = Tensor::from_values({3}, {Variance::Down}, {1, 4, 4}, "v");
  const Tensor up = raise_index(low, 0, m, *kBackend);
  CHECK(up.at({0}) == doctest::Approx(1.0));
  CHECK(up.at({1}) == doctest::Approx(1.0));
  CHECK(up.at({2}) == doctest::Approx(1.0));
}

TEST_CASE("variance and extent guards") {
  const auto m = spherical_metric(2.0, 1.0);
  const Tensor down = Tensor::zeros({3}, {Variance::Down});
  CHECK_THROWS_AS(lower_index(down, 0, m, *kBackend), std::invalid_argument);
  const Tensor up = Tensor::zeros({3}, {Variance::Up});
  CHECK_THROWS_AS(raise_index(up, 0, m, *kBackend), std::invalid_argument);
  const Tensor wrong = Tensor::zeros({4}, {Variance::Up});
  CHECK_THROWS_AS(lower_index(wrong, 0, m, *kBackend), std::invalid_argument);
}

TEST_CASE("lowering distinct modes commutes") {
  const auto m = invert_metric(Tensor::from_values(
      {2, 2}, {Variance::Down, Variance::Down}, {2, 0.5, 0.5, 3}));
  const Tensor t = Tensor::seeded_random({2, 2, 2}, std::vector<Variance>(3, Variance::Up), 9);
  const Tensor a = lower_index(lower_index(t, 0, m, *kBackend), 2, m, *kBackend);
  const Tensor b = lower_index(lower_index(t, 2, m, *kBackend), 0, m, *kBackend);
  CHECK(max_rel_error(a, b) <= 1e-12);
}

TEST_CASE("metric contraction equivalence across placements") {
  // T[+a,+b,-s] S[+s,+r] equals T[+a,+b,+g] contracted with S lowered on g
  const auto m = invert_metric(Tensor::from_values(
      {3, 3}, {Variance::Down, Variance::Down},
      {4, 1, 0.5, 1, 3, 0.25, 0.5, 0.25, 2}));
  const Tensor T = Tensor::seeded_random({2, 2, 3}, std::vector<Variance>(3, Variance::Up), 21, "T");
  const Tensor S = Tensor::seeded_random({3, 2}, std::vector<Variance>(2, Variance::Up), 22, "S");

  // left route: lower T's last mode, then contract with S
  const Tensor Tl = lower_index(T, 2, m, *kBackend);
  const auto s1 = parse("R[+a,+b,+r] = T[+a,+b,-s] * S[+s,+r]");
  const auto v1 = validate(s1, Tl, S);
  auto [r1, st1] = execute(plan(v1), v1, Tl, S, *kBackend);

  // right route: lower S's first mode, then contract with T
  const Tensor Sl = lower_index(S, 0, m, *kBackend);
  const auto s2 = parse("R[+a,+b,+r] = T[+a,+b,+s] * S[-s,+r]");
  const auto v2 = validate(s2, T, Sl);
  auto [r2, st2] = execute(plan(v2), v2, T, Sl, *kBackend);

  CHECK(max_rel_error(r1, r2) <= 1e-12);
}

TEST_CASE("all six single-contraction metric placements match the oracle") {
  const auto m = invert_metric(Tensor::from_values(
      {3, 3}, {Variance::Down, Variance::Down},
      {4, 1, 0.5, 1, 3, 0.25, 0.5, 0.25, 2}));
  const Tensor T = Tensor::seeded_random({3, 3, 3}, std::vector<Variance>(3, Variance::Up), 33, "T");
  const Tensor S = Tensor::seeded_random({3, 3}, std::vector<Variance>(2, Variance::Up), 34, "S");

  struct Case {
    int t_mode;    // which T mode is lowered
    int s_mode;    // which S mode it contracts against
  };
  const std::vector<Case> cases{{2, 0}, {2, 1}, {1, 0}, {1, 1}, {0, 0}, {0, 1}};
  for (const auto& c : cases) {
    CAPTURE(c.t_mode);
    CAPTURE(c.s_mode);
    const Tensor Tl = lower_index(T, c.t_mode, m, *kBackend);

    // build the contraction of Tl's lowered mode with S's chosen mode
    ContractionSpec spec;
    spec.left.name = "T";
    spec.right.name = "S";
    spec.output.name = "R";
    const std::vector<std::string> tl{"a", "b", "c"};
    for (int k = 0; k < 3; ++k) {
      if (k == c.t_mode) spec.left.indices.push_back({"s", Variance::Down});
      else {
        spec.left.indices.push_back({tl[k], Variance::Up});
        spec.output.indices.push_back({tl[k], Variance::Up});
      }
    }
    for (int k = 0; k < 2; ++k) {
      if (k == c.s_mode) spec.right.indices.push_back({"s", Variance::Up});
      else {
        spec.right.indices.push_back({"r", Variance::Up});
        spec.output.indices.push_back({"r", Variance::Up});
      }
    }
    const auto v = validate(spec, Tl, S);
    auto [engine, stats] = execute(plan(v), v, Tl, S, *kBackend);
    const Tensor ref = contract_naive(v, Tl, S);
    CHECK(max_rel_error(engine, ref) <= 1e-12);
  }
}

TEST_CASE("metrics serialize through the tensor text format") {
  const auto m = spherical_metric(2.0, M_PI / 3);
  std::stringstream ss;
  write_tensor(ss, m.g);
  const Tensor back = read_tensor(ss);
  CHECK(max_rel_error(back, m.g) == 0.0);
}
