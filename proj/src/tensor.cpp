#include "tc/tensor.hpp"

#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>

namespace tc {

char variance_char(Variance v) { return v == Variance::Up ? '+' : '-'; }

namespace {

std::int64_t checked_size(const std::vector<std::int64_t>& extents) {
  std::int64_t n = 1;
  for (std::int64_t e : extents) {
    if (e <= 0) throw std::invalid_argument("tensor extent must be positive");
    n *= e;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::int64_t> extents, std::vector<Variance> variance,
               std::string name)
    : extents_(std::move(extents)),
      variance_(std::move(variance)),
      name_(std::move(name)) {
  if (variance_.size() != extents_.size())
    throw std::invalid_argument("variance length does not match extents length");
  const std::int64_t n = checked_size(extents_);
  strides_.resize(extents_.size());
  std::int64_t s = 1;
  for (std::size_t k = 0; k < extents_.size(); ++k) {
    strides_[k] = s;
    s *= extents_[k];
  }
  data_.assign(static_cast<std::size_t>(n), 0.0);
}

Tensor Tensor::zeros(std::vector<std::int64_t> extents,
                     std::vector<Variance> variance, std::string name) {
  return Tensor(std::move(extents), std::move(variance), std::move(name));
}

Tensor Tensor::sequential(std::vector<std::int64_t> extents,
                          std::vector<Variance> variance, std::string name) {
  Tensor t(std::move(extents), std::move(variance), std::move(name));
  for (std::int64_t i = 0; i < t.size(); ++i) t.data_[i] = static_cast<double>(i);
  return t;
}

Tensor Tensor::seeded_random(std::vector<std::int64_t> extents,
                             std::vector<Variance> variance, std::uint64_t seed,
                             std::string name) {
  Tensor t(std::move(extents), std::move(variance), std::move(name));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& x : t.data_) x = dist(rng);
  return t;
}

Tensor Tensor::from_values(std::vector<std::int64_t> extents,
                           std::vector<Variance> variance,
                           std::vector<double> values, std::string name) {
  Tensor t(std::move(extents), std::move(variance), std::move(name));
  if (static_cast<std::int64_t>(values.size()) != t.size())
    throw std::invalid_argument("value count does not match tensor size");
  t.data_ = std::move(values);
  return t;
}

std::int64_t Tensor::extent(int mode) const {
  if (mode < 0 || mode >= rank()) throw std::invalid_argument("mode out of range");
  return extents_[mode];
}

Variance Tensor::variance(int mode) const {
  if (mode < 0 || mode >= rank()) throw std::invalid_argument("mode out of range");
  return variance_[mode];
}

std::int64_t Tensor::offset_of(const std::vector<std::int64_t>& coords) const {
  if (coords.size() != extents_.size())
    throw std::invalid_argument("coordinate rank mismatch");
  std::int64_t off = 0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (coords[k] < 0 || coords[k] >= extents_[k])
      throw std::out_of_range("coordinate out of range");
    off += coords[k] * strides_[k];
  }
  return off;
}

double Tensor::at(const std::vector<std::int64_t>& coords) const {
  return data_[offset_of(coords)];
}

double& Tensor::at(const std::vector<std::int64_t>& coords) {
  return data_[offset_of(coords)];
}

std::int64_t stride_of(const Tensor& t, int mode) {
  if (mode < 0 || mode >= t.rank())
    throw std::invalid_argument("mode out of range");
  return t.strides_[mode];
}

std::int64_t SliceView::offset_of(const std::vector<std::int64_t>& coords) const {
  if (coords.size() != kept.size())
    throw std::invalid_argument("coordinate rank mismatch");
  std::int64_t off = base_offset;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (coords[k] < 0 || coords[k] >= kept[k].extent)
      throw std::out_of_range("coordinate out of range");
    off += coords[k] * kept[k].stride;
  }
  return off;
}

double SliceView::at(const std::vector<std::int64_t>& coords) const {
  return parent->data()[offset_of(coords)];
}

SliceView slice_view(const Tensor& t, const SlicingVector& s,
                     const std::vector<std::int64_t>& fixed) {
  if (static_cast<int>(s.size()) != t.rank())
    throw std::invalid_argument("slicing vector length does not match rank");
  SliceView v;
  v.parent = &t;
  std::size_t fi = 0;
  for (int k = 0; k < t.rank(); ++k) {
    if (s[k]) {
      if (fi >= fixed.size())
        throw std::invalid_argument("missing fixed coordinate for sliced mode");
      const std::int64_t c = fixed[fi++];
      if (c < 0 || c >= t.extent(k))
        throw std::out_of_range("fixed coordinate out of range");
      v.base_offset += c * stride_of(t, k);
    } else {
      v.kept.push_back({k, t.extent(k), stride_of(t, k)});
    }
  }
  if (fi != fixed.size())
    throw std::invalid_argument("too many fixed coordinates");
  return v;
}

PackedMatrix pack_slice(const SliceView& v) {
  if (v.rank() != 2) throw std::invalid_argument("pack_slice requires a 2-mode view");
  PackedMatrix m;
  m.rows = v.kept[0].extent;
  m.cols = v.kept[1].extent;
  m.source_offset = v.base_offset;
  if (v.kept[0].stride == 1) {
    m.leading_dimension = v.kept[1].stride;
    m.data = v.parent->data() + v.base_offset;
    m.copied = false;
    return m;
  }
  m.leading_dimension = m.rows;
  m.copied = true;
  m.storage.resize(static_cast<std::size_t>(m.rows * m.cols));
  const double* src = v.parent->data() + v.base_offset;
  for (std::int64_t j = 0; j < m.cols; ++j)
    for (std::int64_t i = 0; i < m.rows; ++i)
      m.storage[i + j * m.rows] = src[i * v.kept[0].stride + j * v.kept[1].stride];
  m.data = m.storage.data();
  return m;
}

}  // namespace tc
