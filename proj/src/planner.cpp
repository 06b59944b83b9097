#include "tc/planner.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace tc {

std::string to_string(ContractionClass c) {
  switch (c) {
    case ContractionClass::C1: return "1";
    case ContractionClass::C2: return "2";
    case ContractionClass::C31: return "3.1";
    case ContractionClass::C32: return "3.2";
  }
  return "?";
}

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Gemm: return "GEMM";
    case KernelKind::CopyGemm: return "COPY+GEMM";
    case KernelKind::Gemv: return "GEMV";
    case KernelKind::CopyGemv: return "COPY+GEMV";
    case KernelKind::Ger: return "GER";
    case KernelKind::Dot: return "DOT";
    case KernelKind::Elementwise: return "ELEMENTWISE";
  }
  return "?";
}

std::optional<KernelKind> kernel_from_string(const std::string& s) {
  std::string u;
  for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (u == "GEMM") return KernelKind::Gemm;
  if (u == "COPY+GEMM" || u == "COPYGEMM") return KernelKind::CopyGemm;
  if (u == "GEMV") return KernelKind::Gemv;
  if (u == "COPY+GEMV" || u == "COPYGEMV") return KernelKind::CopyGemv;
  if (u == "GER") return KernelKind::Ger;
  if (u == "DOT") return KernelKind::Dot;
  if (u == "ELEMENTWISE") return KernelKind::Elementwise;
  return std::nullopt;
}

std::string to_string(Fallback f) {
  switch (f) {
    case Fallback::None: return "none";
    case Fallback::F1: return "F1";
    case Fallback::F2: return "F2";
    case Fallback::F3: return "F3";
  }
  return "?";
}

namespace {

std::int64_t left_stride_at(const ValidatedContraction& v, int mode) {
  std::int64_t s = 1;
  for (int m = 0; m < mode; ++m) s *= v.label_at_left_mode(m).extent;
  return s;
}

std::int64_t right_stride_at(const ValidatedContraction& v, int mode) {
  std::int64_t s = 1;
  for (int m = 0; m < mode; ++m) s *= v.label_at_right_mode(m).extent;
  return s;
}

std::int64_t output_stride_at(const ValidatedContraction& v, int out_mode) {
  std::int64_t s = 1;
  const auto ext = v.output_extents();
  for (int m = 0; m < out_mode; ++m) s *= ext[m];
  return s;
}

struct KeptShape {
  std::vector<int> left_kept;    // label ids, in left mode order
  std::vector<int> right_kept;   // label ids, in right mode order
  std::vector<int> pairs_kept;   // label ids of kept contracted pairs
  std::vector<int> left_free_kept, right_free_kept;
  std::vector<int> out_kept;     // label ids in output mode order (unsliced)
};

KeptShape kept_shape(const ValidatedContraction& v, const SlicingVector& sl,
                     const SlicingVector& sr) {
  KeptShape ks;
  for (int m = 0; m < v.left_rank(); ++m) {
    if (sl[m]) continue;
    const int li = v.label_index(v.label_at_left_mode(m).label);
    ks.left_kept.push_back(li);
    if (v.labels[li].contracted) ks.pairs_kept.push_back(li);
    else ks.left_free_kept.push_back(li);
  }
  for (int m = 0; m < v.right_rank(); ++m) {
    if (sr[m]) continue;
    const int li = v.label_index(v.label_at_right_mode(m).label);
    ks.right_kept.push_back(li);
    if (!v.labels[li].contracted) ks.right_free_kept.push_back(li);
  }
  for (std::size_t om = 0; om < v.spec.output.indices.size(); ++om) {
    const int li = v.label_index(v.spec.output.indices[om].label);
    const auto& info = v.labels[li];
    const bool sliced = info.left_mode >= 0 ? sl[info.left_mode] != 0
                                            : sr[info.right_mode] != 0;
    if (!sliced) ks.out_kept.push_back(li);
  }
  return ks;
}

bool first_kept_has_stride1(const ValidatedContraction& v, const SlicingVector& s,
                            bool left) {
  const int rank = left ? v.left_rank() : v.right_rank();
  for (int m = 0; m < rank; ++m) {
    if (s[m]) continue;
    return (left ? left_stride_at(v, m) : right_stride_at(v, m)) == 1;
  }
  return true;  // nothing kept
}

bool output_first_kept_has_stride1(const ValidatedContraction& v,
                                   const KeptShape& ks, const SlicingVector& sl,
                                   const SlicingVector& sr) {
  for (std::size_t om = 0; om < v.spec.output.indices.size(); ++om) {
    const int li = v.label_index(v.spec.output.indices[om].label);
    const auto& info = v.labels[li];
    const bool sliced = info.left_mode >= 0 ? sl[info.left_mode] != 0
                                            : sr[info.right_mode] != 0;
    if (!sliced) return output_stride_at(v, static_cast<int>(om)) == 1;
  }
  (void)ks;
  return true;
}

}  // namespace

ContractionClass classify(const ValidatedContraction& v) {
  if (v.delta_left == 0 && v.delta_right == 0) return ContractionClass::C1;
  if (v.delta_left == 0 || v.delta_right == 0) return ContractionClass::C2;
  const auto& l0 = v.label_at_left_mode(0);
  const auto& r0 = v.label_at_right_mode(0);
  if (l0.contracted && r0.contracted && l0.label != r0.label)
    return ContractionClass::C31;
  return ContractionClass::C32;
}

RequirementReport check_requirements(const ValidatedContraction& v,
                                     const SlicingVector& s_left,
                                     const SlicingVector& s_right) {
  if (static_cast<int>(s_left.size()) != v.left_rank() ||
      static_cast<int>(s_right.size()) != v.right_rank())
    throw std::invalid_argument("slicing vector length does not match rank");
  for (int ci : v.contracted) {
    const auto& info = v.labels[ci];
    if (s_left[info.left_mode] != s_right[info.right_mode])
      throw std::invalid_argument("contracted label '" + info.label +
                                  "' sliced in one tensor only");
  }

  RequirementReport rep;
  const auto ks = kept_shape(v, s_left, s_right);
  const auto norm1 = [](const SlicingVector& s) {
    std::int64_t n = 0;
    for (auto b : s) n += b ? 1 : 0;
    return n;
  };

  rep.r1_ok = (v.left_rank() == 0 || s_left[0] == 0) &&
              (v.right_rank() == 0 || s_right[0] == 0);
  rep.r2_ok = norm1(s_left) == v.left_rank() - 2 &&
              norm1(s_right) == v.right_rank() - 2;
  rep.r3_ok = ks.left_free_kept.size() == 1 && ks.right_free_kept.size() == 1 &&
              ks.pairs_kept.size() == 1;

  const std::size_t lk = ks.left_kept.size();
  const std::size_t rk = ks.right_kept.size();
  if (rep.r2_ok && rep.r3_ok) {
    rep.kernel = rep.r1_ok ? KernelKind::Gemm : KernelKind::CopyGemm;
  } else if (ks.pairs_kept.size() == 1 &&
             ((ks.left_free_kept.size() == 1 && lk == 2 &&
               ks.right_free_kept.empty() && rk == 1) ||
              (ks.right_free_kept.size() == 1 && rk == 2 &&
               ks.left_free_kept.empty() && lk == 1))) {
    const bool matrix_is_left = lk == 2;
    const bool direct = first_kept_has_stride1(v, matrix_is_left ? s_left : s_right,
                                               matrix_is_left);
    rep.kernel = direct ? KernelKind::Gemv : KernelKind::CopyGemv;
  } else if (!ks.pairs_kept.empty() && ks.left_free_kept.empty() &&
             ks.right_free_kept.empty()) {
    rep.kernel = KernelKind::Dot;
  } else if (ks.pairs_kept.empty() && ks.left_free_kept.size() == 1 &&
             ks.right_free_kept.size() == 1 && lk == 1 && rk == 1) {
    rep.kernel = KernelKind::Ger;
  } else {
    rep.kernel = KernelKind::Elementwise;
  }

  if (rep.kernel == KernelKind::Gemm) rep.fallback = Fallback::None;
  else if (rep.kernel == KernelKind::CopyGemm) rep.fallback = Fallback::F1;
  else if (!rep.r2_ok) rep.fallback = Fallback::F2;
  else if (!rep.r3_ok) rep.fallback = Fallback::F3;
  else rep.fallback = Fallback::None;
  return rep;
}

namespace {

std::int64_t dims_product(const ValidatedContraction& v, const KeptShape& ks,
                          KernelKind kernel) {
  auto ext = [&](int li) { return v.labels[li].extent; };
  switch (kernel) {
    case KernelKind::Gemm:
    case KernelKind::CopyGemm:
      return ext(ks.left_free_kept[0]) * ext(ks.right_free_kept[0]) *
             ext(ks.pairs_kept[0]);
    case KernelKind::Gemv:
    case KernelKind::CopyGemv: {
      const int f = ks.left_free_kept.empty() ? ks.right_free_kept[0]
                                              : ks.left_free_kept[0];
      return ext(f) * ext(ks.pairs_kept[0]);
    }
    case KernelKind::Ger:
      return ext(ks.left_free_kept[0]) * ext(ks.right_free_kept[0]);
    case KernelKind::Dot: {
      std::int64_t n = 1;
      for (int li : ks.pairs_kept) n *= ext(li);
      return n;
    }
    case KernelKind::Elementwise: {
      std::int64_t n = 1;
      for (int li : ks.left_kept) n *= ext(li);
      for (int li : ks.right_free_kept) n *= ext(li);
      return n;
    }
  }
  return 0;
}

}  // namespace

std::vector<SlicingOption> enumerate_slicings(const ValidatedContraction& v) {
  std::vector<SlicingOption> out;
  const int p = v.p;
  const int nlf = static_cast<int>(v.left_free.size());
  const int nrf = static_cast<int>(v.right_free.size());

  for (std::uint32_t pm = 0; pm < (1u << p); ++pm) {         // bit set = pair kept
    const int pairs_kept = __builtin_popcount(pm);
    if (pairs_kept > 2) continue;
    for (std::uint32_t lm = 0; lm < (1u << nlf); ++lm) {     // bit set = free kept
      if (__builtin_popcount(lm) + pairs_kept > 2) continue;
      for (std::uint32_t rm = 0; rm < (1u << nrf); ++rm) {
        if (__builtin_popcount(rm) + pairs_kept > 2) continue;
        SlicingVector sl(v.left_rank(), 1), sr(v.right_rank(), 1);
        for (int i = 0; i < p; ++i) {
          if (pm & (1u << i)) {
            const auto& info = v.labels[v.contracted[i]];
            sl[info.left_mode] = 0;
            sr[info.right_mode] = 0;
          }
        }
        for (int i = 0; i < nlf; ++i)
          if (lm & (1u << i)) sl[v.labels[v.left_free[i]].left_mode] = 0;
        for (int i = 0; i < nrf; ++i)
          if (rm & (1u << i)) sr[v.labels[v.right_free[i]].right_mode] = 0;

        SlicingOption opt;
        opt.s_left = std::move(sl);
        opt.s_right = std::move(sr);
        opt.report = check_requirements(v, opt.s_left, opt.s_right);
        const auto ks = kept_shape(v, opt.s_left, opt.s_right);
        opt.kernel_dims_product = dims_product(v, ks, opt.report.kernel);
        opt.output_staged =
            !output_first_kept_has_stride1(v, ks, opt.s_left, opt.s_right);
        out.push_back(std::move(opt));
      }
    }
  }

  std::sort(out.begin(), out.end(), [](const SlicingOption& a, const SlicingOption& b) {
    if (a.s_left != b.s_left) return a.s_left < b.s_left;
    return a.s_right < b.s_right;
  });
  return out;
}

namespace {

ExecutionPlan build_plan(const ValidatedContraction& v, ContractionClass cls,
                         const SlicingVector& sl, const SlicingVector& sr,
                         const RequirementReport& rep) {
  ExecutionPlan plan;
  plan.cls = cls;
  plan.s_left = sl;
  plan.s_right = sr;
  plan.kernel = rep.kernel;
  plan.flops = flop_count(v);
  for (const auto& info : v.labels) plan.label_extents.push_back(info.extent);

  const auto ks = kept_shape(v, sl, sr);

  plan.s_output.assign(v.output_rank(), 0);
  for (int om = 0; om < v.output_rank(); ++om) {
    const auto& info = v.labels[v.label_index(v.spec.output.indices[om].label)];
    const bool sliced = info.left_mode >= 0 ? sl[info.left_mode] != 0
                                            : sr[info.right_mode] != 0;
    plan.s_output[om] = sliced ? 1 : 0;
  }

  // Free sliced labels outermost (independent output slices), contracted
  // sliced labels innermost (accumulation into one slice).
  for (std::size_t li = 0; li < v.labels.size(); ++li) {
    const auto& info = v.labels[li];
    if (info.contracted) continue;
    const bool sliced = info.left_mode >= 0 ? sl[info.left_mode] != 0
                                            : sr[info.right_mode] != 0;
    if (sliced) plan.loop_nest.push_back({static_cast<int>(li), false, info.extent});
  }
  for (int ci : v.contracted) {
    const auto& info = v.labels[ci];
    if (sl[info.left_mode])
      plan.loop_nest.push_back({ci, true, info.extent});
  }

  KernelMap& km = plan.kernel_map;
  auto kept_first_label = [&](bool left) -> int {
    return left ? ks.left_kept.front() : ks.right_kept.front();
  };
  switch (rep.kernel) {
    case KernelKind::Gemm:
    case KernelKind::CopyGemm: {
      km.m_label = ks.out_kept[0];
      km.n_label = ks.out_kept[1];
      km.k_label = ks.pairs_kept[0];
      km.a_is_left = v.labels[km.m_label].left_mode >= 0;
      km.trans_a = kept_first_label(km.a_is_left) != km.m_label;
      km.trans_b = kept_first_label(!km.a_is_left) != km.k_label;
      if (!first_kept_has_stride1(v, sl, true)) plan.copies.push_back(CopyTarget::Left);
      if (!first_kept_has_stride1(v, sr, false)) plan.copies.push_back(CopyTarget::Right);
      if (!output_first_kept_has_stride1(v, ks, sl, sr))
        plan.copies.push_back(CopyTarget::OutputStage);
      break;
    }
    case KernelKind::Gemv:
    case KernelKind::CopyGemv: {
      km.matrix_is_left = ks.left_kept.size() == 2;
      km.m_label = km.matrix_is_left ? ks.left_free_kept[0] : ks.right_free_kept[0];
      km.k_label = ks.pairs_kept[0];
      km.trans_a = kept_first_label(km.matrix_is_left) != km.m_label;
      if (rep.kernel == KernelKind::CopyGemv)
        plan.copies.push_back(km.matrix_is_left ? CopyTarget::Left : CopyTarget::Right);
      break;
    }
    case KernelKind::Ger: {
      km.m_label = ks.out_kept[0];
      km.n_label = ks.out_kept[1];
      km.a_is_left = v.labels[km.m_label].left_mode >= 0;
      if (!output_first_kept_has_stride1(v, ks, sl, sr))
        plan.copies.push_back(CopyTarget::OutputStage);
      break;
    }
    case KernelKind::Dot: {
      km.k_label = ks.pairs_kept[0];
      if (ks.pairs_kept.size() == 2) {
        km.k2_label = ks.pairs_kept[1];
        // Run the dot itself over the pair with stride-1 access in the left slice.
        if (left_stride_at(v, v.labels[ks.pairs_kept[1]].left_mode) == 1) {
          km.k_label = ks.pairs_kept[1];
          km.k2_label = ks.pairs_kept[0];
        }
      }
      break;
    }
    case KernelKind::Elementwise:
      break;
  }
  return plan;
}

const SlicingOption* pick_best(const std::vector<SlicingOption>& options,
                               const std::vector<KernelKind>& kinds,
                               bool single_pair_only,
                               const ValidatedContraction& v) {
  const SlicingOption* best = nullptr;
  for (const auto& opt : options) {
    if (std::find(kinds.begin(), kinds.end(), opt.report.kernel) == kinds.end())
      continue;
    if (single_pair_only) {
      const auto ks = kept_shape(v, opt.s_left, opt.s_right);
      if (ks.pairs_kept.size() != 1) continue;
    }
    // Largest kernel dimensions first, then unstaged output, then the
    // lexicographic order the options already come in.
    if (!best || opt.kernel_dims_product > best->kernel_dims_product ||
        (opt.kernel_dims_product == best->kernel_dims_product &&
         best->output_staged && !opt.output_staged))
      best = &opt;
  }
  return best;
}

std::string gemm_blocker(const ValidatedContraction& v, ContractionClass cls) {
  switch (cls) {
    case ContractionClass::C1:
    case ContractionClass::C2:
      return std::min(v.left_rank(), v.right_rank()) < 2 ? "R2" : "R3";
    case ContractionClass::C31:
      return "R1";
    default:
      return "R1";
  }
}

}  // namespace

ExecutionPlan plan(const ValidatedContraction& v, const PlanPolicy& policy) {
  const ContractionClass cls = classify(v);

  if (policy.mode == PlanPolicy::Mode::ForceSlicing) {
    const auto rep = check_requirements(v, policy.s_left, policy.s_right);
    return build_plan(v, cls, policy.s_left, policy.s_right, rep);
  }

  const auto options = enumerate_slicings(v);

  if (policy.mode == PlanPolicy::Mode::ForceKernel) {
    const auto* best = pick_best(options, {policy.kernel}, false, v);
    if (!best) {
      if (policy.kernel == KernelKind::Gemm)
        throw kernel_unreachable_error(KernelKind::Gemm, gemm_blocker(v, cls));
      throw kernel_unreachable_error("kernel unreachable: no slicing yields " +
                                     to_string(policy.kernel));
    }
    return build_plan(v, cls, best->s_left, best->s_right, best->report);
  }

  const SlicingOption* best = nullptr;
  switch (cls) {
    case ContractionClass::C32:
      best = pick_best(options, {KernelKind::Gemm}, false, v);
      break;
    case ContractionClass::C31:
      best = pick_best(options, {KernelKind::CopyGemm}, false, v);
      break;
    case ContractionClass::C2:
      best = pick_best(options, {KernelKind::Gemv}, false, v);
      if (!best) best = pick_best(options, {KernelKind::CopyGemv}, false, v);
      break;
    case ContractionClass::C1:
      best = pick_best(options, {KernelKind::Dot}, true, v);
      break;
  }
  if (!best)
    throw std::logic_error("no recipe-conformant slicing found for class " +
                           to_string(cls));
  return build_plan(v, cls, best->s_left, best->s_right, best->report);
}

std::string render_plan(const ExecutionPlan& p, const ValidatedContraction& v) {
  std::ostringstream os;
  auto tuple = [](const SlicingVector& s) {
    std::string t = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) t += ", ";
      t += s[i] ? '1' : '0';
    }
    t += ")";
    return t;
  };
  os << "class: " << to_string(p.cls) << "\n";
  os << "delta: (" << v.delta_left << ", " << v.delta_right << ")\n";
  os << "s_left: " << tuple(p.s_left) << "\n";
  os << "s_right: " << tuple(p.s_right) << "\n";
  os << "s_output: " << tuple(p.s_output) << "\n";
  os << "kernel: " << to_string(p.kernel) << "\n";
  os << "loop_nest:";
  if (p.loop_nest.empty()) os << " (none)";
  for (const auto& l : p.loop_nest)
    os << ' ' << v.labels[l.label].label << ':' << (l.contracted ? "contracted" : "free");
  os << "\n";
  os << "kernel_map:";
  if (p.kernel_map.m_label >= 0) os << " M=" << v.labels[p.kernel_map.m_label].label;
  if (p.kernel_map.n_label >= 0) os << " N=" << v.labels[p.kernel_map.n_label].label;
  if (p.kernel_map.k_label >= 0) os << " K=" << v.labels[p.kernel_map.k_label].label;
  if (p.kernel_map.k2_label >= 0) os << " K2=" << v.labels[p.kernel_map.k2_label].label;
  if (p.kernel == KernelKind::Gemm || p.kernel == KernelKind::CopyGemm)
    os << " transA=" << (p.kernel_map.trans_a ? 1 : 0)
       << " transB=" << (p.kernel_map.trans_b ? 1 : 0);
  if (p.kernel == KernelKind::Gemv || p.kernel == KernelKind::CopyGemv)
    os << " trans=" << (p.kernel_map.trans_a ? 1 : 0);
  os << "\n";
  os << "copies: " << p.copies.size() << "\n";
  os << "flops: " << p.flops << "\n";
  return os.str();
}

std::optional<std::string> relayout_advice(const ValidatedContraction& v) {
  if (classify(v) != ContractionClass::C31) return std::nullopt;

  // Rotating a suitable label to the stride-1 slot of one operand moves the
  // contraction to class 3.2. Prefer the right operand and large extents.
  struct Candidate {
    bool right;
    int mode;
    std::int64_t extent;
  };
  std::vector<Candidate> cands;
  auto consider = [&](bool right) {
    const int rank = right ? v.right_rank() : v.left_rank();
    const auto& other0 = right ? v.label_at_left_mode(0) : v.label_at_right_mode(0);
    for (int m = 1; m < rank; ++m) {
      const auto& info = right ? v.label_at_right_mode(m) : v.label_at_left_mode(m);
      if (!info.contracted || info.label == other0.label)
        cands.push_back({right, m, info.extent});
    }
  };
  consider(true);
  consider(false);
  if (cands.empty()) return std::nullopt;
  const auto best = *std::max_element(
      cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.extent != b.extent) return a.extent < b.extent;
        if (a.right != b.right) return !a.right && b.right;  // prefer right
        return a.mode > b.mode;
      });

  const TensorExpr& t = best.right ? v.spec.right : v.spec.left;
  std::ostringstream os;
  os << "store " << t.name << " as " << t.name << "[";
  os << variance_char(t.indices[best.mode].var) << t.indices[best.mode].label;
  for (int m = 0; m < static_cast<int>(t.indices.size()); ++m) {
    if (m == best.mode) continue;
    os << ',' << variance_char(t.indices[m].var) << t.indices[m].label;
  }
  os << "] to reach class 3.2 (direct GEMM, no copies)";
  return os.str();
}

}  // namespace tc
