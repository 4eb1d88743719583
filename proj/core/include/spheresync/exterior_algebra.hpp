#pragma once

// Coordinates on the exterior powers Lambda^k(R^d), k = 0..d.
//
// A k-form is stored as C(d,k) coefficients on the basis e_I, I a k-subset
// of {0..d-1} in lexicographic order. All degrees of one element are packed
// into a single buffer of 2^d doubles, degree k starting at offset(k).

#include <cstdint>
#include <vector>

namespace spheresync {

class ExteriorBasis {
 public:
  explicit ExteriorBasis(int d);

  int dimension() const { return d_; }
  /// Total coefficients over all degrees (2^d).
  int packed_size() const { return packed_size_; }
  int offset(int k) const { return offsets_[k]; }
  int count(int k) const { return offsets_[k + 1] - offsets_[k]; }
  /// Bitmask of the j-th basis k-subset.
  std::uint32_t subset(int k, int j) const { return subsets_[offsets_[k] + j]; }
  /// Index of a bitmask within its degree.
  int index_of(std::uint32_t mask) const { return index_[mask]; }

  /// e_I ^ e_a for |I| = k: destination index in degree k+1 and sign.
  struct VectorTerm {
    int source;
    int axis;
    int target;
    double sign;
  };
  const std::vector<VectorTerm>& append_terms(int k) const { return append_[k]; }
  const std::vector<VectorTerm>& prepend_terms(int k) const { return prepend_[k]; }

  /// e_I ^ e_J for |I| = k, |J| = d-1-k, I and J disjoint; `missing` is the
  /// single axis absent from I u J.
  struct CoTerm {
    int left;
    int right;
    int missing;
    double sign;
  };
  const std::vector<CoTerm>& codegree_terms(int k) const { return codegree_[k]; }

  /// Sign of e_I ^ e_J relative to e_{I u J}; 0 if I and J overlap.
  static double merge_sign(std::uint32_t left, std::uint32_t right);

 private:
  int d_;
  int packed_size_;
  std::vector<int> offsets_;
  std::vector<std::uint32_t> subsets_;
  std::vector<int> index_;
  std::vector<std::vector<VectorTerm>> append_;
  std::vector<std::vector<VectorTerm>> prepend_;
  std::vector<std::vector<CoTerm>> codegree_;
};

}  // namespace spheresync
