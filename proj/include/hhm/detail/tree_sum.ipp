#pragma once

#include <algorithm>

namespace hhm {

template <class TermFn>
Vec tree_sum(std::size_t count, std::size_t width, TermFn&& term) {
  constexpr std::size_t kBlock = 32;
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  if (blocks == 0) return Vec(width, 0.0);
  std::vector<double> partial(blocks * width, 0.0);
  Vec buf(width);
  for (std::size_t b = 0; b < blocks; ++b) {
    double* acc = partial.data() + b * width;
    const std::size_t end = std::min(count, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      term(i, buf.data());
      for (std::size_t k = 0; k < width; ++k) acc[k] += buf[k];
    }
  }
  for (std::size_t stride = 1; stride < blocks; stride *= 2) {
    for (std::size_t b = 0; b + stride < blocks; b += 2 * stride) {
      double* lhs = partial.data() + b * width;
      const double* rhs = partial.data() + (b + stride) * width;
      for (std::size_t k = 0; k < width; ++k) lhs[k] += rhs[k];
    }
  }
  return Vec(partial.begin(), partial.begin() + static_cast<std::ptrdiff_t>(width));
}

}  // namespace hhm
