#include "spheresync/exterior_algebra.hpp"

#include <algorithm>
#include <bit>

#include "spheresync/errors.hpp"

namespace spheresync {

double ExteriorBasis::merge_sign(std::uint32_t left, std::uint32_t right) {
  if ((left & right) != 0U) return 0.0;
  // Parity of the pairs (a in left, b in right) with a > b.
  int inversions = 0;
  for (std::uint32_t rest = right; rest != 0U; rest &= rest - 1U) {
    const std::uint32_t b = static_cast<std::uint32_t>(std::countr_zero(rest));
    inversions += std::popcount(left >> (b + 1U));
  }
  return (inversions % 2 == 0) ? 1.0 : -1.0;
}

ExteriorBasis::ExteriorBasis(int d) : d_(d) {
  if (d < 1 || d > 20) throw ValidationError("exterior basis dimension must be in [1, 20]");
  const std::uint32_t full = 1U << d;
  packed_size_ = static_cast<int>(full);

  // Lexicographic order of index subsets within each degree.
  std::vector<std::vector<std::uint32_t>> by_degree(static_cast<std::size_t>(d + 1));
  auto emit = [&](auto&& self, int start, int k, std::uint32_t mask) -> void {
    by_degree[static_cast<std::size_t>(k)].push_back(mask);
    for (int a = start; a < d; ++a) self(self, a + 1, k + 1, mask | (1U << a));
  };
  emit(emit, 0, 0, 0U);
  for (auto& list : by_degree) {
    std::sort(list.begin(), list.end(), [](std::uint32_t x, std::uint32_t y) {
      // Compare as sorted index sequences.
      while (x != 0U && y != 0U) {
        const int ax = std::countr_zero(x);
        const int ay = std::countr_zero(y);
        if (ax != ay) return ax < ay;
        x &= x - 1U;
        y &= y - 1U;
      }
      return x == 0U && y != 0U;
    });
  }

  offsets_.assign(static_cast<std::size_t>(d + 2), 0);
  index_.assign(full, -1);
  for (int k = 0; k <= d; ++k) {
    offsets_[k + 1] = offsets_[k] + static_cast<int>(by_degree[k].size());
    for (int j = 0; j < static_cast<int>(by_degree[k].size()); ++j) {
      subsets_.push_back(by_degree[k][j]);
      index_[by_degree[k][j]] = j;
    }
  }

  append_.resize(static_cast<std::size_t>(d));
  prepend_.resize(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < count(k); ++j) {
      const std::uint32_t mask = subset(k, j);
      for (int a = 0; a < d; ++a) {
        const std::uint32_t bit = 1U << a;
        if ((mask & bit) != 0U) continue;
        const int target = index_of(mask | bit);
        append_[k].push_back({j, a, target, merge_sign(mask, bit)});
        prepend_[k].push_back({j, a, target, merge_sign(bit, mask)});
      }
    }
  }

  codegree_.resize(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    const int l = d - 1 - k;
    for (int i = 0; i < count(k); ++i) {
      for (int j = 0; j < count(l); ++j) {
        const std::uint32_t left = subset(k, i);
        const std::uint32_t right = subset(l, j);
        if ((left & right) != 0U) continue;
        const std::uint32_t missing_mask = (full - 1U) & ~(left | right);
        codegree_[k].push_back(
            {i, j, std::countr_zero(missing_mask), merge_sign(left, right)});
      }
    }
  }
}

}  // namespace spheresync
