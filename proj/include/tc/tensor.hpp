#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tc {

enum class Variance : std::uint8_t { Up, Down };

char variance_char(Variance v);

/// Dense rank-N array of doubles in generalized column-major order:
/// mode 0 has stride 1, mode k has stride extents[0]*...*extents[k-1].
/// Each mode carries a variance marker (up = contravariant row mode,
/// down = covariant column mode). Rank 0 is a single-element scalar holder.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::int64_t> extents, std::vector<Variance> variance,
         std::string name = "t");

  static Tensor zeros(std::vector<std::int64_t> extents,
                      std::vector<Variance> variance, std::string name = "t");
  /// Fills element i of the flat storage with the value i.
  static Tensor sequential(std::vector<std::int64_t> extents,
                           std::vector<Variance> variance,
                           std::string name = "t");
  /// Uniform values in [-1, 1]; identical data for identical seeds.
  static Tensor seeded_random(std::vector<std::int64_t> extents,
                              std::vector<Variance> variance,
                              std::uint64_t seed, std::string name = "t");
  /// Values are consumed in storage order (mode 0 fastest).
  static Tensor from_values(std::vector<std::int64_t> extents,
                            std::vector<Variance> variance,
                            std::vector<double> values, std::string name = "t");

  int rank() const { return static_cast<int>(extents_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  const std::vector<std::int64_t>& extents() const { return extents_; }
  std::int64_t extent(int mode) const;
  const std::vector<Variance>& variance() const { return variance_; }
  Variance variance(int mode) const;
  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double at(const std::vector<std::int64_t>& coords) const;
  double& at(const std::vector<std::int64_t>& coords);
  std::int64_t offset_of(const std::vector<std::int64_t>& coords) const;

 private:
  std::vector<std::int64_t> extents_;
  std::vector<std::int64_t> strides_;
  std::vector<Variance> variance_;
  std::vector<double> data_;
  std::string name_ = "t";

  friend std::int64_t stride_of(const Tensor& t, int mode);
};

/// Memory distance between adjacent elements along `mode`; stride_of(t, 0) == 1.
std::int64_t stride_of(const Tensor& t, int mode);

/// Per-mode 0/1 slicing marker, 1 = the mode is fixed coordinate-by-coordinate.
using SlicingVector = std::vector<std::uint8_t>;

struct KeptMode {
  int mode = 0;               // mode index in the parent tensor
  std::int64_t extent = 0;
  std::int64_t stride = 0;
};

/// A lower-dimensional view into a tensor: the modes with s = 0, in original
/// order and with original strides, at a base offset determined by the fixed
/// coordinates of the sliced modes.
struct SliceView {
  const Tensor* parent = nullptr;
  std::int64_t base_offset = 0;
  std::vector<KeptMode> kept;

  int rank() const { return static_cast<int>(kept.size()); }
  std::int64_t offset_of(const std::vector<std::int64_t>& coords) const;
  double at(const std::vector<std::int64_t>& coords) const;
};

SliceView slice_view(const Tensor& t, const SlicingVector& s,
                     const std::vector<std::int64_t>& fixed);

/// Column-major matrix over contiguous or parent-aliased storage.
/// Element (i, j) lives at data[i + j * leading_dimension].
struct PackedMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::int64_t leading_dimension = 0;
  const double* data = nullptr;
  bool copied = false;            // false: data aliases the parent tensor
  std::int64_t source_offset = 0; // view identity
  std::vector<double> storage;    // owns the buffer when copied
};

/// Materializes a 2-mode view as a column-major matrix. When the first kept
/// mode already has stride 1 the result aliases parent memory with the second
/// kept mode's stride as leading dimension; otherwise the elements are copied
/// into a fresh buffer with leading_dimension = rows.
PackedMatrix pack_slice(const SliceView& v);

}  // namespace tc
