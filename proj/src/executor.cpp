#include "tc/executor.hpp"

#include "tc/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tc {

namespace {

struct SliceTemplate {
  std::vector<KeptMode> kept;  // parent modes with s = 0, original order
};

SliceTemplate make_template(const Tensor& t, const SlicingVector& s) {
  SliceTemplate st;
  for (int m = 0; m < t.rank(); ++m)
    if (!s[m]) st.kept.push_back({m, t.extent(m), stride_of(t, m)});
  return st;
}

struct LoopDim {
  std::int64_t extent = 1;
  std::int64_t lstride = 0, rstride = 0, ostride = 0;
};

// A matrix operand materialized for a kernel call.
struct MatArg {
  const double* data = nullptr;
  std::int64_t rows = 0, cols = 0, ld = 0;
  std::int64_t copied_bytes = 0;
};

MatArg materialize(const double* base, const SliceTemplate& st,
                   std::vector<double>& scratch) {
  MatArg m;
  m.rows = st.kept[0].extent;
  m.cols = st.kept[1].extent;
  if (st.kept[0].stride == 1) {
    m.data = base;
    m.ld = st.kept[1].stride;
    return m;
  }
  scratch.resize(static_cast<std::size_t>(m.rows * m.cols));
  for (std::int64_t j = 0; j < m.cols; ++j)
    for (std::int64_t i = 0; i < m.rows; ++i)
      scratch[i + j * m.rows] = base[i * st.kept[0].stride + j * st.kept[1].stride];
  m.data = scratch.data();
  m.ld = m.rows;
  m.copied_bytes = static_cast<std::int64_t>(m.rows * m.cols) * 8;
  return m;
}

struct WorkerCtx {
  const ExecutionPlan* plan;
  const ValidatedContraction* v;
  const Tensor* left;
  const Tensor* right;
  Tensor* out;
  const KernelBackend* backend;
  std::vector<LoopDim> free_dims;        // outermost first
  std::vector<LoopDim> contracted_dims;  // outermost first
  SliceTemplate lt, rt, ot;
};

std::int64_t dim_offset(const std::vector<LoopDim>& dims,
                        std::vector<std::int64_t>& coords, std::int64_t flat,
                        std::int64_t LoopDim::*stride) {
  // Decode flat into per-dim coordinates, last dim fastest.
  std::int64_t off = 0;
  for (std::size_t i = dims.size(); i-- > 0;) {
    coords[i] = flat % dims[i].extent;
    flat /= dims[i].extent;
    off += coords[i] * (dims[i].*stride);
  }
  return off;
}

std::string coords_text(const WorkerCtx& cx, const std::vector<std::int64_t>& fc,
                        const std::vector<std::int64_t>& cc) {
  std::ostringstream os;
  os << " at slice coordinates [";
  std::size_t fi = 0, ci = 0;
  bool first = true;
  for (const auto& l : cx.plan->loop_nest) {
    if (!first) os << ", ";
    first = false;
    os << cx.v->labels[l.label].label << '='
       << (l.contracted ? cc[ci++] : fc[fi++]);
  }
  os << ']';
  return os.str();
}

void run_range(WorkerCtx& cx, std::int64_t flo, std::int64_t fhi,
               ExecutionStats& stats) {
  const ExecutionPlan& plan = *cx.plan;
  const KernelMap& km = plan.kernel_map;
  const double* L = cx.left->data();
  const double* R = cx.right->data();
  double* O = cx.out->data();

  std::int64_t cspace = 1;
  for (const auto& d : cx.contracted_dims) cspace *= d.extent;

  std::vector<std::int64_t> fc(cx.free_dims.size(), 0);
  std::vector<std::int64_t> cc(cx.contracted_dims.size(), 0);
  std::vector<double> lscratch, rscratch, ostage;

  const auto ext = [&](int li) { return cx.v->labels[li].extent; };

  for (std::int64_t f = flo; f < fhi; ++f) {
    const std::int64_t lfree = dim_offset(cx.free_dims, fc, f, &LoopDim::lstride);
    std::int64_t rfree = 0, ofree = 0;
    {
      std::int64_t tmp = f;
      for (std::size_t i = cx.free_dims.size(); i-- > 0;) {
        const std::int64_t c = tmp % cx.free_dims[i].extent;
        tmp /= cx.free_dims[i].extent;
        rfree += c * cx.free_dims[i].rstride;
        ofree += c * cx.free_dims[i].ostride;
      }
    }

    // Output slice for this free coordinate; staged when its first kept
    // mode is not unit-stride.
    double* cptr = nullptr;
    std::int64_t ldc = 0;
    bool staged = false;
    if (plan.kernel == KernelKind::Gemm || plan.kernel == KernelKind::CopyGemm ||
        plan.kernel == KernelKind::Ger) {
      if (cx.ot.kept[0].stride == 1) {
        cptr = O + ofree;
        ldc = cx.ot.kept[1].stride;
      } else {
        staged = true;
        ostage.assign(static_cast<std::size_t>(cx.ot.kept[0].extent *
                                               cx.ot.kept[1].extent),
                      0.0);
        cptr = ostage.data();
        ldc = cx.ot.kept[0].extent;
      }
    }

    for (std::int64_t c = 0; c < cspace; ++c) {
      const std::int64_t lcon = dim_offset(cx.contracted_dims, cc, c, &LoopDim::lstride);
      std::int64_t rcon = 0;
      {
        std::int64_t tmp = c;
        for (std::size_t i = cx.contracted_dims.size(); i-- > 0;) {
          rcon += (tmp % cx.contracted_dims[i].extent) * cx.contracted_dims[i].rstride;
          tmp /= cx.contracted_dims[i].extent;
        }
      }
      const double beta = c == 0 ? 0.0 : 1.0;
      const double* lbase = L + lfree + lcon;
      const double* rbase = R + rfree + rcon;

      try {
        switch (plan.kernel) {
          case KernelKind::Gemm:
          case KernelKind::CopyGemm: {
            MatArg a_arg = materialize(km.a_is_left ? lbase : rbase,
                                       km.a_is_left ? cx.lt : cx.rt, lscratch);
            MatArg b_arg = materialize(km.a_is_left ? rbase : lbase,
                                       km.a_is_left ? cx.rt : cx.lt, rscratch);
            stats.packed_bytes += a_arg.copied_bytes + b_arg.copied_bytes;
            cx.backend->gemm(km.trans_a, km.trans_b, ext(km.m_label), ext(km.n_label),
                             ext(km.k_label), 1.0, a_arg.data, a_arg.ld, b_arg.data,
                             b_arg.ld, beta, cptr, ldc);
            ++stats.kernel_calls;
            break;
          }
          case KernelKind::Gemv:
          case KernelKind::CopyGemv: {
            const auto& mt = km.matrix_is_left ? cx.lt : cx.rt;
            const double* mbase = km.matrix_is_left ? lbase : rbase;
            const double* vbase = km.matrix_is_left ? rbase : lbase;
            const auto& vt = km.matrix_is_left ? cx.rt : cx.lt;
            MatArg a_arg = materialize(mbase, mt, lscratch);
            stats.packed_bytes += a_arg.copied_bytes;
            double* y = O + ofree;
            const std::int64_t incy = cx.ot.kept[0].stride;
            cx.backend->gemv(km.trans_a, a_arg.rows, a_arg.cols, 1.0, a_arg.data,
                             a_arg.ld, vbase, vt.kept[0].stride, beta, y, incy);
            ++stats.kernel_calls;
            break;
          }
          case KernelKind::Ger: {
            const bool x_is_left = km.a_is_left;
            const double* x = x_is_left ? lbase : rbase;
            const double* y = x_is_left ? rbase : lbase;
            const auto& xt = x_is_left ? cx.lt : cx.rt;
            const auto& yt = x_is_left ? cx.rt : cx.lt;
            cx.backend->ger(ext(km.m_label), ext(km.n_label), 1.0, x,
                            xt.kept[0].stride, y, yt.kept[0].stride, cptr, ldc);
            ++stats.kernel_calls;
            break;
          }
          case KernelKind::Dot: {
            const auto& kinfo = cx.v->labels[km.k_label];
            const std::int64_t lx = stride_of(*cx.left, kinfo.left_mode);
            const std::int64_t ry = stride_of(*cx.right, kinfo.right_mode);
            double acc = 0.0;
            if (km.k2_label >= 0) {
              const auto& k2 = cx.v->labels[km.k2_label];
              const std::int64_t l2 = stride_of(*cx.left, k2.left_mode);
              const std::int64_t r2 = stride_of(*cx.right, k2.right_mode);
              for (std::int64_t q = 0; q < k2.extent; ++q) {
                acc += cx.backend->dot(kinfo.extent, lbase + q * l2, lx,
                                       rbase + q * r2, ry);
                ++stats.kernel_calls;
              }
            } else {
              acc = cx.backend->dot(kinfo.extent, lbase, lx, rbase, ry);
              ++stats.kernel_calls;
            }
            O[ofree] += acc;
            break;
          }
          case KernelKind::Elementwise: {
            // Generic slice update: iterate all kept labels of both slices.
            std::vector<LoopDim> dims;
            for (const auto& k : cx.lt.kept) {
              const auto& info = cx.v->label_at_left_mode(k.mode);
              LoopDim d;
              d.extent = k.extent;
              d.lstride = k.stride;
              if (info.contracted)
                d.rstride = stride_of(*cx.right, info.right_mode);
              if (info.output_mode >= 0)
                d.ostride = stride_of(*cx.out, info.output_mode);
              dims.push_back(d);
            }
            for (const auto& k : cx.rt.kept) {
              const auto& info = cx.v->label_at_right_mode(k.mode);
              if (info.contracted) continue;  // already covered via left
              LoopDim d;
              d.extent = k.extent;
              d.rstride = k.stride;
              if (info.output_mode >= 0)
                d.ostride = stride_of(*cx.out, info.output_mode);
              dims.push_back(d);
            }
            std::int64_t space = 1;
            for (const auto& d : dims) space *= d.extent;
            for (std::int64_t e = 0; e < space; ++e) {
              std::int64_t lo = 0, ro = 0, oo = 0, tmp = e;
              for (std::size_t i = dims.size(); i-- > 0;) {
                const std::int64_t cd = tmp % dims[i].extent;
                tmp /= dims[i].extent;
                lo += cd * dims[i].lstride;
                ro += cd * dims[i].rstride;
                oo += cd * dims[i].ostride;
              }
              O[ofree + oo] += lbase[lo] * rbase[ro];
            }
            ++stats.kernel_calls;
            break;
          }
        }
      } catch (const std::exception& e) {
        throw std::runtime_error(std::string(e.what()) + coords_text(cx, fc, cc));
      }
    }

    if (staged) {
      const auto& k0 = cx.ot.kept[0];
      const auto& k1 = cx.ot.kept[1];
      for (std::int64_t j = 0; j < k1.extent; ++j)
        for (std::int64_t i = 0; i < k0.extent; ++i)
          O[ofree + i * k0.stride + j * k1.stride] = ostage[i + j * k0.extent];
      stats.staged_bytes += k0.extent * k1.extent * 8;
    }
  }
}

}  // namespace

std::pair<Tensor, ExecutionStats> execute(const ExecutionPlan& plan,
                                          const ValidatedContraction& v,
                                          const Tensor& left, const Tensor& right,
                                          const KernelBackend& backend,
                                          int workers) {
  if (plan.label_extents.size() != v.labels.size())
    throw std::invalid_argument("plan does not match contraction");
  for (std::size_t i = 0; i < v.labels.size(); ++i) {
    if (v.labels[i].extent != plan.label_extents[i])
      throw std::invalid_argument("extent drift between planning and execution on label '" +
                                  v.labels[i].label + "'");
    const auto& info = v.labels[i];
    if (info.left_mode >= 0 && left.extent(info.left_mode) != info.extent)
      throw std::invalid_argument("left operand extent drift on label '" + info.label + "'");
    if (info.right_mode >= 0 && right.extent(info.right_mode) != info.extent)
      throw std::invalid_argument("right operand extent drift on label '" + info.label + "'");
  }

  const auto t0 = std::chrono::steady_clock::now();
  Tensor out(v.output_extents(), v.output_variance(), v.spec.output.name);

  WorkerCtx cx;
  cx.plan = &plan;
  cx.v = &v;
  cx.left = &left;
  cx.right = &right;
  cx.out = &out;
  cx.backend = &backend;
  cx.lt = make_template(left, plan.s_left);
  cx.rt = make_template(right, plan.s_right);
  cx.ot = make_template(out, plan.s_output);

  for (const auto& l : plan.loop_nest) {
    const auto& info = v.labels[l.label];
    LoopDim d;
    d.extent = info.extent;
    if (info.left_mode >= 0) d.lstride = stride_of(left, info.left_mode);
    if (info.right_mode >= 0) d.rstride = stride_of(right, info.right_mode);
    if (info.output_mode >= 0) d.ostride = stride_of(out, info.output_mode);
    if (l.contracted) cx.contracted_dims.push_back(d);
    else cx.free_dims.push_back(d);
  }

  std::int64_t fspace = 1;
  for (const auto& d : cx.free_dims) fspace *= d.extent;

  ExecutionStats stats;
  stats.flops = plan.flops;

  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(fspace)));
  if (nw == 1) {
    run_range(cx, 0, fspace, stats);
  } else {
    std::vector<ExecutionStats> wstats(nw);
    std::vector<std::thread> threads;
    std::vector<WorkerCtx> ctxs(nw, cx);
    std::exception_ptr error;
    std::mutex error_mu;
    for (int w = 0; w < nw; ++w) {
      const std::int64_t lo = fspace * w / nw;
      const std::int64_t hi = fspace * (w + 1) / nw;
      threads.emplace_back([&, w, lo, hi] {
        try {
          run_range(ctxs[w], lo, hi, wstats[w]);
        } catch (...) {
          std::lock_guard<std::mutex> g(error_mu);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
    for (const auto& ws : wstats) {
      stats.kernel_calls += ws.kernel_calls;
      stats.packed_bytes += ws.packed_bytes;
      stats.staged_bytes += ws.staged_bytes;
    }
  }

  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(out), stats};
}

std::uint64_t tensor_hash(const Tensor& t) {
  std::uint64_t h = 1469598103934665603ull;
  const double* d = t.data();
  for (std::int64_t i = 0; i < t.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &d[i], 8);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  }
  return h;
}

double max_rel_error(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double scale = 1.0;
  for (std::int64_t i = 0; i < b.size(); ++i)
    scale = std::max(scale, std::abs(b.data()[i]));
  double err = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i)
    err = std::max(err, std::abs(a.data()[i] - b.data()[i]));
  return err / scale;
}

std::vector<SlicingRun> execute_all_slicings(const ValidatedContraction& v,
                                             const Tensor& left,
                                             const Tensor& right,
                                             const KernelBackend& backend,
                                             std::int64_t work_cap) {
  const auto options = enumerate_slicings(v);
  const std::int64_t per = flop_count(v) / 2;
  if (per * static_cast<std::int64_t>(options.size()) > work_cap)
    throw resource_limit_error("slicing sweep work exceeds cap");

  std::vector<SlicingRun> runs;
  for (const auto& opt : options) {
    SlicingRun run;
    run.s_left = opt.s_left;
    run.s_right = opt.s_right;
    run.kernel = opt.report.kernel;
    const ExecutionPlan p =
        plan(v, PlanPolicy::force_slicing(opt.s_left, opt.s_right));
    auto [result, stats] = execute(p, v, left, right, backend);
    run.result_hash = tensor_hash(result);
    run.stats = stats;
    run.result = std::move(result);
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace tc
