#include "tc/expr.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace tc {

namespace {

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!eat(c)) fail(std::string("expected '") + c + "' " + what);
  }

  std::string name(const char* what) {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail(std::string("expected ") + what);
    if (!std::isalpha(static_cast<unsigned char>(s_[start])))
      fail(std::string(what) + " must start with a letter");
    return s_.substr(start, pos_ - start);
  }

  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }

  [[noreturn]] void fail(const std::string& msg) { throw parse_error(msg, pos_); }

  std::size_t pos() const { return pos_; }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

TensorExpr parse_tensor(Lexer& lx) {
  TensorExpr t;
  t.name = lx.name("tensor name");
  lx.expect('[', "after tensor name");
  if (lx.eat(']')) return t;
  while (true) {
    IndexRef idx;
    if (lx.eat('+')) idx.var = Variance::Up;
    else if (lx.eat('-')) idx.var = Variance::Down;
    else lx.fail("expected '+' or '-' before index label");
    idx.label = lx.name("index label");
    t.indices.push_back(idx);
    if (lx.eat(']')) break;
    lx.expect(',', "between indices");
  }
  return t;
}

struct Occurrence {
  int count = 0;
  Variance first_var = Variance::Up;
};

}  // namespace

ContractionSpec parse(const std::string& expr, bool positional) {
  Lexer lx(expr);
  ContractionSpec spec;
  spec.positional = positional;
  spec.output = parse_tensor(lx);
  lx.expect('=', "after output tensor");
  spec.left = parse_tensor(lx);
  lx.expect('*', "between operands");
  spec.right = parse_tensor(lx);
  if (!lx.at_end()) lx.fail("trailing characters after expression");

  auto dup_check = [&](const TensorExpr& t) {
    for (std::size_t i = 0; i < t.indices.size(); ++i)
      for (std::size_t j = i + 1; j < t.indices.size(); ++j)
        if (t.indices[i].label == t.indices[j].label)
          lx.fail("label '" + t.indices[i].label + "' repeated within tensor " + t.name);
  };
  dup_check(spec.output);
  dup_check(spec.left);
  dup_check(spec.right);

  std::map<std::string, Occurrence> left_occ, right_occ;
  for (const auto& idx : spec.left.indices) {
    left_occ[idx.label] = {1, idx.var};
  }
  for (const auto& idx : spec.right.indices) {
    right_occ[idx.label] = {1, idx.var};
  }

  int p = 0;
  for (const auto& [label, occ] : left_occ) {
    auto it = right_occ.find(label);
    const bool in_output =
        std::any_of(spec.output.indices.begin(), spec.output.indices.end(),
                    [&](const IndexRef& o) { return o.label == label; });
    if (it != right_occ.end()) {
      ++p;
      if (!positional && occ.first_var == it->second.first_var)
        lx.fail("contracted label '" + label + "' must have opposite variance");
      if (in_output)
        lx.fail("contracted label '" + label + "' must not appear in the output");
    } else if (!in_output) {
      lx.fail("free label '" + label + "' missing from output");
    }
  }
  for (const auto& [label, occ] : right_occ) {
    (void)occ;
    if (left_occ.count(label)) continue;
    const bool in_output =
        std::any_of(spec.output.indices.begin(), spec.output.indices.end(),
                    [&](const IndexRef& o) { return o.label == label; });
    if (!in_output) lx.fail("free label '" + label + "' missing from output");
  }
  for (const auto& o : spec.output.indices) {
    auto lit = left_occ.find(o.label);
    auto rit = right_occ.find(o.label);
    if (lit == left_occ.end() && rit == right_occ.end())
      lx.fail("output label '" + o.label + "' does not appear in any operand");
    const Variance src = lit != left_occ.end() ? lit->second.first_var
                                               : rit->second.first_var;
    if (!positional && src != o.var)
      lx.fail("output label '" + o.label + "' changes variance");
  }
  if (p == 0) lx.fail("expression has no contracted index");
  return spec;
}

std::string unparse(const ContractionSpec& spec) {
  auto render = [](const TensorExpr& t) {
    std::ostringstream os;
    os << t.name << '[';
    for (std::size_t i = 0; i < t.indices.size(); ++i) {
      if (i) os << ',';
      os << variance_char(t.indices[i].var) << t.indices[i].label;
    }
    os << ']';
    return os.str();
  };
  return render(spec.output) + " = " + render(spec.left) + " * " + render(spec.right);
}

const LabelInfo& ValidatedContraction::label_at_left_mode(int mode) const {
  for (const auto& l : labels)
    if (l.left_mode == mode) return l;
  throw std::invalid_argument("no label at left mode");
}

const LabelInfo& ValidatedContraction::label_at_right_mode(int mode) const {
  for (const auto& l : labels)
    if (l.right_mode == mode) return l;
  throw std::invalid_argument("no label at right mode");
}

int ValidatedContraction::label_index(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i].label == label) return static_cast<int>(i);
  return -1;
}

std::vector<std::int64_t> ValidatedContraction::output_extents() const {
  std::vector<std::int64_t> e;
  for (const auto& idx : spec.output.indices)
    e.push_back(labels[label_index(idx.label)].extent);
  return e;
}

std::vector<Variance> ValidatedContraction::output_variance() const {
  std::vector<Variance> v;
  for (const auto& idx : spec.output.indices) v.push_back(idx.var);
  return v;
}

ValidatedContraction validate(const ContractionSpec& spec, const Tensor& left,
                              const Tensor& right) {
  if (left.rank() != static_cast<int>(spec.left.indices.size()))
    throw std::invalid_argument("left tensor rank does not match index list");
  if (right.rank() != static_cast<int>(spec.right.indices.size()))
    throw std::invalid_argument("right tensor rank does not match index list");

  ValidatedContraction v;
  v.spec = spec;

  for (int m = 0; m < left.rank(); ++m) {
    const auto& idx = spec.left.indices[m];
    if (!spec.positional && left.variance(m) != idx.var)
      throw std::invalid_argument("left tensor variance mismatch on label '" +
                                  idx.label + "'");
    LabelInfo info;
    info.label = idx.label;
    info.extent = left.extent(m);
    info.left_mode = m;
    v.labels.push_back(info);
  }
  for (int m = 0; m < right.rank(); ++m) {
    const auto& idx = spec.right.indices[m];
    if (!spec.positional && right.variance(m) != idx.var)
      throw std::invalid_argument("right tensor variance mismatch on label '" +
                                  idx.label + "'");
    const int li = v.label_index(idx.label);
    if (li >= 0) {
      auto& info = v.labels[li];
      info.right_mode = m;
      info.contracted = true;
      if (info.extent != right.extent(m))
        throw std::invalid_argument(
            "extent mismatch on label '" + idx.label + "' (" +
            std::to_string(info.extent) + " vs " + std::to_string(right.extent(m)) +
            ")");
    } else {
      LabelInfo info;
      info.label = idx.label;
      info.extent = right.extent(m);
      info.right_mode = m;
      v.labels.push_back(info);
    }
  }
  for (std::size_t i = 0; i < spec.output.indices.size(); ++i) {
    const int li = v.label_index(spec.output.indices[i].label);
    v.labels[li].output_mode = static_cast<int>(i);
  }

  for (std::size_t i = 0; i < v.labels.size(); ++i) {
    const auto& info = v.labels[i];
    if (info.contracted) v.contracted.push_back(static_cast<int>(i));
    else if (info.left_mode >= 0) v.left_free.push_back(static_cast<int>(i));
    else v.right_free.push_back(static_cast<int>(i));
  }
  v.p = static_cast<int>(v.contracted.size());
  v.delta_left = left.rank() - v.p;
  v.delta_right = right.rank() - v.p;
  return v;
}

std::int64_t flop_count(const ValidatedContraction& v) {
  std::int64_t n = 2;
  for (const auto& l : v.labels) n *= l.extent;
  return n;
}

}  // namespace tc
