#include "cxr/rng.hpp"

#include <algorithm>

namespace cxr {

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n,
                                                         std::size_t m) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  shuffle(idx);
  idx.resize(std::min(m, n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace cxr
