#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "tc/tensor.hpp"
#include "tc/tensor_io.hpp"

using namespace tc;

namespace {

std::vector<Variance> ups(int n) { return std::vector<Variance>(n, Variance::Up); }

}  // namespace

TEST_CASE("column-major layout definition") {
  // extents [2,2] filled from values [1,3,2,4]: element (0,1)=2, (1,0)=3
  const Tensor t = Tensor::from_values({2, 2}, ups(2), {1, 3, 2, 4});
  CHECK(t.at({0, 0}) == 1);
  CHECK(t.at({1, 0}) == 3);
  CHECK(t.at({0, 1}) == 2);
  CHECK(t.at({1, 1}) == 4);
}

TEST_CASE("zeros fill") {
  const Tensor t = Tensor::zeros({3}, {Variance::Down});
  for (std::int64_t i = 0; i < t.size(); ++i) CHECK(t.data()[i] == 0.0);
}

TEST_CASE("seeded random is reproducible") {
  const Tensor a = Tensor::seeded_random({2, 3, 4}, ups(3), 7);
  const Tensor b = Tensor::seeded_random({2, 3, 4}, ups(3), 7);
  const Tensor c = Tensor::seeded_random({2, 3, 4}, ups(3), 8);
  REQUIRE(a.size() == b.size());
  bool identical = true, differs = false;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    identical = identical && a.data()[i] == b.data()[i];
    differs = differs || a.data()[i] != c.data()[i];
  }
  CHECK(identical);
  CHECK(differs);
}

TEST_CASE("strides") {
  const Tensor t = Tensor::zeros({5, 7, 9}, ups(3));
  CHECK(stride_of(t, 0) == 1);
  CHECK(stride_of(t, 1) == 5);
  CHECK(stride_of(t, 2) == 35);
  const Tensor u = Tensor::zeros({4}, ups(1));
  CHECK(stride_of(u, 0) == 1);
  CHECK_THROWS_AS(stride_of(u, 1), std::invalid_argument);
}

TEST_CASE("strides strictly increase when extents > 1") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 50; ++it) {
    const int rank = 1 + static_cast<int>(rng() % 4);
    std::vector<std::int64_t> ext;
    for (int k = 0; k < rank; ++k) ext.push_back(2 + rng() % 4);
    const Tensor t = Tensor::zeros(ext, ups(rank));
    for (int k = 1; k < rank; ++k) CHECK(stride_of(t, k) > stride_of(t, k - 1));
  }
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(Tensor::zeros({3, 0}, ups(2)), std::invalid_argument);
  CHECK_THROWS_AS(Tensor::zeros({3, -1}, ups(2)), std::invalid_argument);
  CHECK_THROWS_AS(Tensor::zeros({3}, ups(2)), std::invalid_argument);
  CHECK_THROWS_AS(Tensor::from_values({2}, ups(1), {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("rank-0 tensor holds one element") {
  Tensor t = Tensor::zeros({}, {});
  CHECK(t.rank() == 0);
  CHECK(t.size() == 1);
  t.at({}) = 3.5;
  CHECK(t.at({}) == 3.5);
}

TEST_CASE("slice views match the stride-1 convention") {
  const std::int64_t m = 3, n = 4, k = 5;
  const Tensor t = Tensor::seeded_random({m, n, k}, ups(3), 1);

  // s = (0,1,0): keeps stride-1 alpha and sigma with stride m*n
  const SliceView a = slice_view(t, {0, 1, 0}, {2});
  REQUIRE(a.rank() == 2);
  CHECK(a.kept[0].stride == 1);
  CHECK(a.kept[1].stride == m * n);
  CHECK(a.base_offset == 2 * m);

  // s = (1,0,0): both kept strides > 1
  const SliceView b = slice_view(t, {1, 0, 0}, {1});
  CHECK(b.kept[0].stride == m);
  CHECK(b.kept[1].stride == m * n);

  // all-zero slicing: whole tensor
  const SliceView whole = slice_view(t, {0, 0, 0}, {});
  CHECK(whole.base_offset == 0);
  CHECK(whole.rank() == 3);
}

TEST_CASE("slice view errors") {
  const Tensor t = Tensor::zeros({3, 4}, ups(2));
  CHECK_THROWS_AS(slice_view(t, {0, 1, 0}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(slice_view(t, {0, 1}, {4}), std::out_of_range);
  CHECK_THROWS_AS(slice_view(t, {0, 1}, {}), std::invalid_argument);
}

TEST_CASE("view reads equal parent reads, exhaustively for small tensors") {
  std::mt19937_64 rng(23);
  for (int it = 0; it < 60; ++it) {
    const int rank = 1 + static_cast<int>(rng() % 4);
    std::vector<std::int64_t> ext;
    for (int k = 0; k < rank; ++k) ext.push_back(1 + rng() % 5);
    const Tensor t = Tensor::seeded_random(ext, ups(rank), rng());

    SlicingVector s(rank);
    for (auto& b : s) b = rng() % 2;
    std::vector<std::int64_t> fixed;
    for (int k = 0; k < rank; ++k)
      if (s[k]) fixed.push_back(static_cast<std::int64_t>(rng() % ext[k]));
    const SliceView v = slice_view(t, s, fixed);

    std::vector<std::int64_t> vc(v.rank(), 0);
    bool done = v.rank() == 0;
    while (true) {
      std::vector<std::int64_t> pc(rank);
      std::size_t fi = 0, ki = 0;
      for (int k = 0; k < rank; ++k)
        pc[k] = s[k] ? fixed[fi++] : vc[ki++];
      CHECK(v.at(vc) == t.at(pc));
      if (done) break;
      std::size_t q = 0;
      for (; q < vc.size(); ++q) {
        if (++vc[q] < v.kept[q].extent) break;
        vc[q] = 0;
      }
      if (q == vc.size()) break;
    }
  }
}

TEST_CASE("union property: slices over all fixed coordinates partition the tensor") {
  const Tensor t = Tensor::sequential({3, 4, 2}, ups(3));
  const SlicingVector s{1, 0, 1};
  std::set<std::int64_t> seen;
  for (std::int64_t c0 = 0; c0 < 3; ++c0)
    for (std::int64_t c2 = 0; c2 < 2; ++c2) {
      const SliceView v = slice_view(t, s, {c0, c2});
      for (std::int64_t j = 0; j < v.kept[0].extent; ++j) {
        const auto off = v.offset_of({j});
        CHECK(seen.insert(off).second);
      }
    }
  CHECK(seen.size() == static_cast<std::size_t>(t.size()));
}

TEST_CASE("pack_slice alias fast path") {
  const Tensor t = Tensor::seeded_random({5, 7, 9}, ups(3), 3);
  const SliceView v = slice_view(t, {0, 1, 0}, {4});
  const PackedMatrix m = pack_slice(v);
  CHECK_FALSE(m.copied);
  CHECK(m.leading_dimension == 35);
  CHECK(m.rows == 5);
  CHECK(m.cols == 9);
  CHECK(m.data == t.data() + v.base_offset);
}

TEST_CASE("pack_slice copies strided views") {
  const Tensor t = Tensor::seeded_random({5, 5, 9}, ups(3), 4);
  const SliceView v = slice_view(t, {1, 0, 0}, {2});
  const PackedMatrix m = pack_slice(v);
  CHECK(m.copied);
  CHECK(m.rows == 5);
  CHECK(m.cols == 9);
  CHECK(m.leading_dimension == 5);
  for (std::int64_t j = 0; j < m.cols; ++j)
    for (std::int64_t i = 0; i < m.rows; ++i)
      CHECK(m.data[i + j * m.leading_dimension] == v.at({i, j}));
}

TEST_CASE("pack_slice equals element-wise view reads on randomized views") {
  std::mt19937_64 rng(99);
  for (int it = 0; it < 200; ++it) {
    const int rank = 2 + static_cast<int>(rng() % 3);
    std::vector<std::int64_t> ext;
    for (int k = 0; k < rank; ++k) ext.push_back(1 + rng() % 5);
    const Tensor t = Tensor::seeded_random(ext, ups(rank), rng());

    // choose exactly 2 kept modes
    int k0 = static_cast<int>(rng() % rank), k1 = k0;
    while (k1 == k0) k1 = static_cast<int>(rng() % rank);
    if (k0 > k1) std::swap(k0, k1);
    SlicingVector s(rank, 1);
    s[k0] = s[k1] = 0;
    std::vector<std::int64_t> fixed;
    for (int k = 0; k < rank; ++k)
      if (s[k]) fixed.push_back(static_cast<std::int64_t>(rng() % ext[k]));

    const SliceView v = slice_view(t, s, fixed);
    const PackedMatrix m = pack_slice(v);
    for (std::int64_t j = 0; j < m.cols; ++j)
      for (std::int64_t i = 0; i < m.rows; ++i)
        CHECK(m.data[i + j * m.leading_dimension] == v.at({i, j}));
  }
}

TEST_CASE("pack_slice rejects non-matrix views") {
  const Tensor t = Tensor::zeros({3, 4, 5}, ups(3));
  const SliceView v = slice_view(t, {1, 1, 0}, {0, 0});
  CHECK_THROWS_AS(pack_slice(v), std::invalid_argument);
}

TEST_CASE("1x1 view packs to a single element") {
  const Tensor t = Tensor::from_values({1, 3, 1}, ups(3), {5, 6, 7});
  const SliceView v = slice_view(t, {0, 1, 0}, {1});
  const PackedMatrix m = pack_slice(v);
  CHECK(m.rows == 1);
  CHECK(m.cols == 1);
  CHECK(m.data[0] == 6);
}

TEST_CASE("tensor text format round-trips") {
  const Tensor t = Tensor::seeded_random({3, 1, 4}, {Variance::Up, Variance::Down,
                                                     Variance::Up}, 42, "X");
  std::stringstream ss;
  write_tensor(ss, t);
  const Tensor u = read_tensor(ss);
  CHECK(u.name() == "X");
  CHECK(u.extents() == t.extents());
  CHECK(u.variance() == t.variance());
  for (std::int64_t i = 0; i < t.size(); ++i) CHECK(u.data()[i] == t.data()[i]);
}

TEST_CASE("tensor text format rank 0") {
  Tensor t = Tensor::zeros({}, {}, "K");
  t.at({}) = -2.25;
  std::stringstream ss;
  write_tensor(ss, t);
  const Tensor u = read_tensor(ss);
  CHECK(u.rank() == 0);
  CHECK(u.at({}) == -2.25);
}

TEST_CASE("tensor text format header") {
  const Tensor t = Tensor::from_values({2}, {Variance::Down}, {1.5, -0.5}, "v");
  std::stringstream ss;
  write_tensor(ss, t);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "TENSOR v1");
  std::getline(ss, line);
  CHECK(line == "name v");
  std::getline(ss, line);
  CHECK(line == "rank 1");
  std::getline(ss, line);
  CHECK(line == "extents 2");
  std::getline(ss, line);
  CHECK(line == "variance -");
  std::getline(ss, line);
  CHECK(line == "layout colmajor");
}

TEST_CASE("malformed tensor files are rejected") {
  std::stringstream ss("TENSOR v2\n");
  CHECK_THROWS(read_tensor(ss));
  std::stringstream ss2("TENSOR v1\nname t\nrank 1\nextents 2\nvariance +\nlayout colmajor\n1.0\n");
  CHECK_THROWS(read_tensor(ss2));  // truncated values
}
