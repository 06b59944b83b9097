#include "tc/oracle.hpp"

namespace tc {

namespace {

// Per-label strides into a tensor, 0 when the label does not address it.
struct LabelStrides {
  std::vector<std::int64_t> left, right, out, extent;
};

LabelStrides gather(const ValidatedContraction& v, const Tensor& left,
                    const Tensor& right, const Tensor& out) {
  LabelStrides ls;
  const std::size_t n = v.labels.size();
  ls.left.assign(n, 0);
  ls.right.assign(n, 0);
  ls.out.assign(n, 0);
  ls.extent.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& info = v.labels[i];
    ls.extent[i] = info.extent;
    if (info.left_mode >= 0) ls.left[i] = stride_of(left, info.left_mode);
    if (info.right_mode >= 0) ls.right[i] = stride_of(right, info.right_mode);
    if (info.output_mode >= 0) ls.out[i] = stride_of(out, info.output_mode);
  }
  return ls;
}

}  // namespace

Tensor contract_naive(const ValidatedContraction& v, const Tensor& left,
                      const Tensor& right, std::int64_t work_cap,
                      OracleStats* stats) {
  std::int64_t work = 1;
  for (const auto& l : v.labels) work *= l.extent;
  if (work > work_cap)
    throw resource_limit_error("oracle work exceeds cap: " + std::to_string(work) +
                               " multiply-adds");

  Tensor out(v.output_extents(), v.output_variance(), v.spec.output.name);
  const LabelStrides ls = gather(v, left, right, out);

  // Free labels: output order. Contracted labels: left-mode order, first fastest.
  std::vector<int> free_labels;
  for (const auto& idx : v.spec.output.indices) free_labels.push_back(v.label_index(idx.label));
  const std::vector<int>& csum = v.contracted;

  std::vector<std::int64_t> fc(free_labels.size(), 0);
  const double* L = left.data();
  const double* R = right.data();
  double* O = out.data();
  std::int64_t macs = 0;

  while (true) {
    std::int64_t lbase = 0, rbase = 0, obase = 0;
    for (std::size_t i = 0; i < free_labels.size(); ++i) {
      const int li = free_labels[i];
      lbase += fc[i] * ls.left[li];
      rbase += fc[i] * ls.right[li];
      obase += fc[i] * ls.out[li];
    }

    double acc = 0.0;
    std::vector<std::int64_t> cc(csum.size(), 0);
    while (true) {
      std::int64_t loff = lbase, roff = rbase;
      for (std::size_t i = 0; i < csum.size(); ++i) {
        loff += cc[i] * ls.left[csum[i]];
        roff += cc[i] * ls.right[csum[i]];
      }
      acc += L[loff] * R[roff];
      ++macs;

      std::size_t k = 0;
      for (; k < csum.size(); ++k) {
        if (++cc[k] < ls.extent[csum[k]]) break;
        cc[k] = 0;
      }
      if (k == csum.size()) break;
    }
    O[obase] = acc;

    std::size_t k = 0;
    for (; k < free_labels.size(); ++k) {
      if (++fc[k] < ls.extent[free_labels[k]]) break;
      fc[k] = 0;
    }
    if (k == free_labels.size()) break;
  }

  if (stats) stats->multiply_adds = macs;
  return out;
}

}  // namespace tc
