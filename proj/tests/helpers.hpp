#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "tc/expr.hpp"

namespace tst {

inline tc::Tensor operand(const tc::TensorExpr& te,
                          const std::map<std::string, std::int64_t>& extents,
                          std::uint64_t seed) {
  std::vector<std::int64_t> ext;
  std::vector<tc::Variance> var;
  for (const auto& idx : te.indices) {
    ext.push_back(extents.at(idx.label));
    var.push_back(idx.var);
  }
  return tc::Tensor::seeded_random(std::move(ext), std::move(var), seed, te.name);
}

struct Bound {
  tc::ContractionSpec spec;
  tc::Tensor left;
  tc::Tensor right;
  tc::ValidatedContraction v;
};

inline Bound bind_expr(const std::string& expr,
                  const std::map<std::string, std::int64_t>& extents,
                  std::uint64_t seed = 1, bool positional = false) {
  Bound b{tc::parse(expr, positional), {}, {}, {}};
  b.left = operand(b.spec.left, extents, seed);
  b.right = operand(b.spec.right, extents, seed + 1);
  b.v = tc::validate(b.spec, b.left, b.right);
  return b;
}

// Random valid spec in the ranks 2..4, p 1..3, extents 1..6 family.
struct RandomContraction {
  tc::ContractionSpec spec;
  tc::Tensor left;
  tc::Tensor right;
  tc::ValidatedContraction v;
};

inline RandomContraction random_contraction(std::mt19937_64& rng,
                                            std::int64_t max_extent = 6) {
  const std::vector<std::string> pool{"a", "b", "c", "d", "e", "f", "g", "h"};
  while (true) {
    const int lrank = 2 + static_cast<int>(rng() % 3);
    const int rrank = 2 + static_cast<int>(rng() % 3);
    const int p = 1 + static_cast<int>(rng() % 3);
    if (p > lrank || p > rrank) continue;

    std::vector<std::string> labels = pool;
    std::shuffle(labels.begin(), labels.end(), rng);
    int next = 0;

    std::vector<tc::IndexRef> lidx(lrank), ridx(rrank);
    std::vector<int> lslots(lrank), rslots(rrank);
    for (int i = 0; i < lrank; ++i) lslots[i] = i;
    for (int i = 0; i < rrank; ++i) rslots[i] = i;
    std::shuffle(lslots.begin(), lslots.end(), rng);
    std::shuffle(rslots.begin(), rslots.end(), rng);

    tc::ContractionSpec s;
    s.output.name = "R";
    s.left.name = "A";
    s.right.name = "B";
    for (int i = 0; i < p; ++i) {
      const auto lab = labels[next++];
      const tc::Variance v = rng() % 2 ? tc::Variance::Up : tc::Variance::Down;
      lidx[lslots[i]] = {lab, v};
      ridx[rslots[i]] = {lab, v == tc::Variance::Up ? tc::Variance::Down
                                                    : tc::Variance::Up};
    }
    std::vector<tc::IndexRef> outs;
    for (int i = p; i < lrank; ++i) {
      const auto lab = labels[next++];
      lidx[lslots[i]] = {lab, rng() % 2 ? tc::Variance::Up : tc::Variance::Down};
      outs.push_back(lidx[lslots[i]]);
    }
    for (int i = p; i < rrank; ++i) {
      const auto lab = labels[next++];
      ridx[rslots[i]] = {lab, rng() % 2 ? tc::Variance::Up : tc::Variance::Down};
      outs.push_back(ridx[rslots[i]]);
    }
    std::shuffle(outs.begin(), outs.end(), rng);
    s.left.indices = lidx;
    s.right.indices = ridx;
    s.output.indices = outs;

    std::map<std::string, std::int64_t> extents;
    for (const auto& idx : lidx)
      extents.emplace(idx.label, 1 + static_cast<std::int64_t>(rng() % max_extent));
    for (const auto& idx : ridx)
      extents.emplace(idx.label, 1 + static_cast<std::int64_t>(rng() % max_extent));

    RandomContraction rc{s, operand(s.left, extents, rng()),
                         operand(s.right, extents, rng()), {}};
    rc.v = tc::validate(s, rc.left, rc.right);
    return rc;
  }
}

// The 18 double contractions between A[+a,+b,+g] and a 3-mode B: three
// choices of the contracted pair of A-labels, three positions for B's free
// label e, two orders of the contracted labels in B.
inline std::vector<std::string> table1_expressions() {
  const std::vector<std::vector<std::string>> contracted_sets{
      {"b", "g"}, {"a", "g"}, {"a", "b"}};
  const std::vector<std::string> frees{"a", "b", "g"};
  std::vector<std::string> out;
  for (int set = 0; set < 3; ++set) {
    const auto& cs = contracted_sets[set];
    const std::string& fa = frees[set];
    for (int pos = 0; pos < 3; ++pos) {      // position of e in B
      for (int order = 0; order < 2; ++order) {
        const std::string c1 = order ? cs[1] : cs[0];
        const std::string c2 = order ? cs[0] : cs[1];
        std::vector<std::string> b_labels;
        int ci = 0;
        for (int k = 0; k < 3; ++k) {
          if (k == pos) b_labels.push_back("e");
          else b_labels.push_back(ci++ ? c2 : c1);
        }
        std::string expr = "R[+" + fa + ",-e] = A[+a,+b,+g] * B[";
        for (int k = 0; k < 3; ++k)
          expr += std::string(k ? "," : "") + "-" + b_labels[k];
        expr += "]";
        out.push_back(expr);
      }
    }
  }
  return out;
}

}  // namespace tst
