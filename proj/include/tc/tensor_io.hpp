#pragma once

#include <iosfwd>
#include <string>

#include "tc/tensor.hpp"

namespace tc {

/// Text format:
///   TENSOR v1
///   name <identifier>
///   rank <r>
///   extents e1 ... er
///   variance <'+'/'-' string of length r>
///   layout colmajor
///   <whitespace-separated values in column-major order, mode 0 fastest>
void write_tensor(std::ostream& os, const Tensor& t);
void write_tensor_file(const std::string& path, const Tensor& t);

Tensor read_tensor(std::istream& is);
Tensor read_tensor_file(const std::string& path);

}  // namespace tc
