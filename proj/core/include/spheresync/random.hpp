#pragma once

#include <cstdint>
#include <random>

namespace spheresync {

/// Seeded random source with a fixed, platform-independent output stream.
///
/// Raw bits come from std::mt19937_64, whose sequence is pinned by the C++
/// standard. Uniform doubles take the top 53 bits; Gaussians use the
/// Box-Muller transform (both outputs of a pair are used). The standard
/// library distributions are deliberately avoided because their algorithms
/// are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal.
  double gaussian();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace spheresync
