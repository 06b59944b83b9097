#include "tc/tensor_io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tc {

void write_tensor(std::ostream& os, const Tensor& t) {
  os << "TENSOR v1\n";
  os << "name " << (t.name().empty() ? "t" : t.name()) << "\n";
  os << "rank " << t.rank() << "\n";
  os << "extents";
  for (int k = 0; k < t.rank(); ++k) os << ' ' << t.extent(k);
  os << "\n";
  os << "variance ";
  for (int k = 0; k < t.rank(); ++k) os << variance_char(t.variance(k));
  os << "\n";
  os << "layout colmajor\n";
  os << std::setprecision(17);
  const double* d = t.data();
  for (std::int64_t i = 0; i < t.size(); ++i) {
    os << d[i] << ((i + 1) % 8 == 0 || i + 1 == t.size() ? '\n' : ' ');
  }
}

void write_tensor_file(const std::string& path, const Tensor& t) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_tensor(f, t);
}

namespace {

std::string expect_line(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("truncated tensor file");
  return line;
}

std::string strip_prefix(const std::string& line, const std::string& key) {
  if (line.rfind(key, 0) != 0)
    throw std::runtime_error("malformed tensor file: expected '" + key + "' line");
  std::size_t pos = key.size();
  while (pos < line.size() && line[pos] == ' ') ++pos;
  return line.substr(pos);
}

}  // namespace

Tensor read_tensor(std::istream& is) {
  if (expect_line(is) != "TENSOR v1")
    throw std::runtime_error("not a TENSOR v1 file");
  const std::string name = strip_prefix(expect_line(is), "name");
  const int rank = std::stoi(strip_prefix(expect_line(is), "rank"));
  if (rank < 0) throw std::runtime_error("negative rank");

  std::istringstream ext(strip_prefix(expect_line(is), "extents"));
  std::vector<std::int64_t> extents;
  std::int64_t e = 0;
  while (ext >> e) extents.push_back(e);
  if (static_cast<int>(extents.size()) != rank)
    throw std::runtime_error("extent count does not match rank");

  const std::string vs = strip_prefix(expect_line(is), "variance");
  if (static_cast<int>(vs.size()) != rank)
    throw std::runtime_error("variance string length does not match rank");
  std::vector<Variance> variance;
  for (char c : vs) {
    if (c == '+') variance.push_back(Variance::Up);
    else if (c == '-') variance.push_back(Variance::Down);
    else throw std::runtime_error("variance characters must be '+' or '-'");
  }

  if (strip_prefix(expect_line(is), "layout") != "colmajor")
    throw std::runtime_error("unsupported layout");

  Tensor t(std::move(extents), std::move(variance), name);
  for (std::int64_t i = 0; i < t.size(); ++i) {
    if (!(is >> t.data()[i])) throw std::runtime_error("truncated value section");
  }
  return t;
}

Tensor read_tensor_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return read_tensor(f);
}

}  // namespace tc
