#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "deepmpc/shares.hpp"

namespace deepmpc {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& s);

// Shared fixed-point tensor, row-major. Dimension 0 is the batch.
struct Tensor {
  Shape shape;
  ArithVec data;

  Tensor() = default;
  Tensor(Shape s, ArithVec d);
  std::size_t batch() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t sample_size() const;
};

}  // namespace deepmpc
