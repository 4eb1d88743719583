#include "spheresync/interaction_kernels.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "dual_detail.hpp"
#include "spheresync/errors.hpp"

namespace spheresync {

namespace {

void require_dbody_shape(const Matrix& nodes) {
  const auto d = nodes.rows();
  const auto n = nodes.cols();
  if (d < 2) throw ValidationError(fmt::format("dimension d = {} must be at least 2", d));
  if (n < d) {
    throw ValidationError(
        fmt::format("d-body coupling needs N >= d (got N = {}, d = {})", n, d));
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

// Depth-first enumeration of ordered tuples of distinct node indices.
// `inversions` tracks the parity of the tuple built so far, so the
// signature is available at the leaves without re-sorting.
struct TupleWalker {
  const Matrix& nodes;
  int d;
  int n;
  std::vector<int> tuple;
  std::vector<char> used;
  std::vector<const double*> cols;

  TupleWalker(const Matrix& x)
      : nodes(x),
        d(static_cast<int>(x.rows())),
        n(static_cast<int>(x.cols())),
        used(static_cast<std::size_t>(x.cols()), 0),
        cols(static_cast<std::size_t>(x.rows()), nullptr) {}

  template <class Leaf>
  void walk(int depth, int inversions, Leaf&& leaf) {
    if (depth == d) {
      leaf(inversions % 2 == 0 ? 1.0 : -1.0);
      return;
    }
    for (int j = 0; j < n; ++j) {
      if (used[j] != 0) continue;
      int above = 0;
      for (int p = 0; p < depth; ++p) above += tuple[p] > j ? 1 : 0;
      used[j] = 1;
      tuple.push_back(j);
      cols[depth] = nodes.col(j).data();
      walk(depth + 1, inversions + above, leaf);
      tuple.pop_back();
      used[j] = 0;
    }
  }
};

}  // namespace

int tuple_signature(const std::vector<int>& indices) {
  int inversions = 0;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    for (std::size_t b = a + 1; b < indices.size(); ++b) {
      if (indices[a] == indices[b]) return 0;
      if (indices[a] > indices[b]) ++inversions;
    }
  }
  return inversions % 2 == 0 ? 1 : -1;
}

double potential_pairwise(const Matrix& nodes) {
  const Vector sum = nodes.rowwise().sum();
  return sum.squaredNorm();
}

DriveField pairwise_drive(const Matrix& nodes) {
  const Vector mean = nodes.rowwise().mean();
  return mean.replicate(1, nodes.cols());
}

double potential_dbody_naive(const Matrix& nodes) {
  require_dbody_shape(nodes);
  TupleWalker walker(nodes);
  const int d = walker.d;
  double total = 0.0;
  walker.walk(0, 0, [&](double sign) {
    total += sign * detail::determinant_columns(d, walker.cols.data());
  });
  return total;
}

DriveField dbody_drive_naive(const Matrix& nodes) {
  require_dbody_shape(nodes);
  const int d = static_cast<int>(nodes.rows());
  const int n = static_cast<int>(nodes.cols());
  DriveField out = DriveField::Zero(d, n);
  TupleWalker walker(nodes);
  std::vector<double> dual(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    // Fix the leading index to i; the walker fills positions 1..d-1.
    walker.used[i] = 1;
    walker.tuple.assign(1, i);
    walker.cols[0] = nodes.col(i).data();
    Vector acc = Vector::Zero(d);
    walker.walk(1, 0, [&](double sign) {
      detail::hodge_dual_columns(d, walker.cols.data() + 1, dual.data());
      for (int a = 0; a < d; ++a) acc[a] += sign * dual[a];
    });
    walker.used[i] = 0;
    walker.tuple.clear();
    out.col(i) = acc;
  }
  return out / std::pow(static_cast<double>(n), d - 1);
}

WedgeTables::WedgeTables(const ExteriorBasis& basis, const Matrix& nodes, int max_degree)
    : n_(static_cast<int>(nodes.cols())), stride_(basis.packed_size()) {
  const int d = basis.dimension();
  const std::size_t positions = static_cast<std::size_t>(n_) + 1;
  prefix_.assign(positions * stride_, 0.0);
  suffix_.assign(positions * stride_, 0.0);

  prefix_[0] = 1.0;
  for (int m = 0; m < n_; ++m) {
    const double* src = prefix_.data() + static_cast<std::size_t>(m) * stride_;
    double* dst = prefix_.data() + static_cast<std::size_t>(m + 1) * stride_;
    std::copy(src, src + stride_, dst);
    const double* x = nodes.col(m).data();
    for (int k = std::min(max_degree, d) - 1; k >= 0; --k) {
      const double* lower = src + basis.offset(k);
      double* upper = dst + basis.offset(k + 1);
      for (const auto& t : basis.append_terms(k)) upper[t.target] += t.sign * lower[t.source] * x[t.axis];
    }
  }

  suffix_[static_cast<std::size_t>(n_) * stride_] = 1.0;
  for (int m = n_ - 1; m >= 0; --m) {
    const double* src = suffix_.data() + static_cast<std::size_t>(m + 1) * stride_;
    double* dst = suffix_.data() + static_cast<std::size_t>(m) * stride_;
    std::copy(src, src + stride_, dst);
    const double* x = nodes.col(m).data();
    for (int k = std::min(max_degree, d) - 1; k >= 0; --k) {
      const double* lower = src + basis.offset(k);
      double* upper = dst + basis.offset(k + 1);
      for (const auto& t : basis.prepend_terms(k)) upper[t.target] += t.sign * x[t.axis] * lower[t.source];
    }
  }
}

FastDbodyKernel::FastDbodyKernel(int d) : basis_(d), ordering_factor_(factorial(d - 1)) {
  if (d < 2) throw ValidationError(fmt::format("dimension d = {} must be at least 2", d));
}

void FastDbodyKernel::drive(const Matrix& nodes, DriveField& out) const {
  require_dbody_shape(nodes);
  const int d = basis_.dimension();
  if (nodes.rows() != d) throw ValidationError("node dimension does not match kernel dimension");
  const int n = static_cast<int>(nodes.cols());
  const WedgeTables tables(basis_, nodes, d - 1);
  const double scale = ordering_factor_ / std::pow(static_cast<double>(n), d - 1);

  out.resize(d, n);
  std::array<double, 32> small{};
  std::vector<double> big;
  double* w = small.data();
  if (d > 32) {
    big.assign(static_cast<std::size_t>(d), 0.0);
    w = big.data();
  }
  for (int i = 0; i < n; ++i) {
    std::fill(w, w + d, 0.0);
    const double* below = tables.prefix(i);
    const double* above = tables.suffix(i + 1);
    for (int k = 0; k < d; ++k) {
      const double parity = (k % 2 == 0) ? 1.0 : -1.0;
      const double* left = below + basis_.offset(k);
      const double* right = above + basis_.offset(d - 1 - k);
      for (const auto& t : basis_.codegree_terms(k)) {
        w[t.missing] += parity * t.sign * left[t.left] * right[t.right];
      }
    }
    // Dual of a (d-1)-form: v_a = (-1)^a w_{complement of a}.
    for (int a = 0; a < d; ++a) out(a, i) = scale * ((a % 2 == 0) ? w[a] : -w[a]);
  }
}

DriveField FastDbodyKernel::drive(const Matrix& nodes) const {
  DriveField out;
  drive(nodes, out);
  return out;
}

double FastDbodyKernel::potential(const Matrix& nodes) const {
  require_dbody_shape(nodes);
  const int d = basis_.dimension();
  if (nodes.rows() != d) throw ValidationError("node dimension does not match kernel dimension");
  const WedgeTables tables(basis_, nodes, d);
  return ordering_factor_ * d * tables.prefix(tables.size())[basis_.offset(d)];
}

double potential_dbody(const Matrix& nodes) {
  require_dbody_shape(nodes);
  return FastDbodyKernel(static_cast<int>(nodes.rows())).potential(nodes);
}

DriveField dbody_drive_fast(const Matrix& nodes) {
  require_dbody_shape(nodes);
  return FastDbodyKernel(static_cast<int>(nodes.rows())).drive(nodes);
}

double relative_field_deviation(const DriveField& a, const DriveField& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("relative_field_deviation: shape mismatch");
  }
  double diff = 0.0;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    diff = std::max(diff, (a.col(i) - b.col(i)).norm());
    scale = std::max(scale, b.col(i).norm());
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace spheresync
