#pragma once

// Potentials and drive vectors for global pairwise coupling and for the
// signature-weighted d-body coupling.
//
// All functions take the raw d x N node matrix (columns are nodes) so they
// can be evaluated on intermediate integrator stages and under finite
// difference perturbations; overloads accept a Configuration.
//
// The d-body drive of node i is
//
//   Y_i = N^{-(d-1)} sum_{i2..id} eps_{i,i2..id} v_{i2..id},
//
// with v the Hodge dual of x_{i2}, ..., x_{id} and eps the signature of the
// index tuple (zero on repeated indices). Y_i = grad_i V_d / (d N^{d-1}).

#include <algorithm>
#include <vector>

#include "spheresync/exterior_algebra.hpp"
#include "spheresync/sphere_geometry.hpp"

namespace spheresync {

/// Column i holds the unprojected interaction vector Y_i.
using DriveField = Matrix;

/// Sum_{ij} x_i.x_j with global coupling a_ij = 1 (equals N^2 |X_av|^2).
double potential_pairwise(const Matrix& nodes);
inline double potential_pairwise(const Configuration& c) { return potential_pairwise(c.nodes()); }

/// Y_i = X_av for every node.
DriveField pairwise_drive(const Matrix& nodes);
inline DriveField pairwise_drive(const Configuration& c) { return pairwise_drive(c.nodes()); }

/// Sum over all index tuples of eps_{i1..id} det(x_i1, ..., x_id), evaluated
/// as d! times the top-degree elementary wedge sum. Throws ValidationError
/// when N < d.
double potential_dbody(const Matrix& nodes);
inline double potential_dbody(const Configuration& c) { return potential_dbody(c.nodes()); }

/// Direct enumeration of every ordered tuple; O(N^d). Test oracle.
double potential_dbody_naive(const Matrix& nodes);

/// Enumerates all (N-1)!/(N-d)! ordered tuples of distinct indices per node.
DriveField dbody_drive_naive(const Matrix& nodes);
inline DriveField dbody_drive_naive(const Configuration& c) { return dbody_drive_naive(c.nodes()); }

/// Prefix/suffix elementary-wedge tables over Lambda^k(R^d).
///
/// prefix(m, k) = sum over sorted k-subsets of nodes {0..m-1} of the wedge
/// of those nodes; suffix(m, k) likewise over nodes {m..N-1}. Degree-0
/// entries are 1 and prefix(N, k) is the full elementary wedge sum.
class WedgeTables {
 public:
  WedgeTables(const ExteriorBasis& basis, const Matrix& nodes, int max_degree);

  int size() const { return n_; }
  /// Pointer to the packed coefficients of all degrees at cut position m.
  const double* prefix(int m) const { return prefix_.data() + static_cast<std::size_t>(m) * stride_; }
  const double* suffix(int m) const { return suffix_.data() + static_cast<std::size_t>(m) * stride_; }

 private:
  int n_;
  int stride_;
  std::vector<double> prefix_;
  std::vector<double> suffix_;
};

/// Reusable evaluator for the fast d-body drive.
///
/// Summing the (d-1)! orderings of each index set S (i not in S) against the
/// antisymmetric dual leaves (d-1)! sum_S (-1)^{#{j in S : j < i}} v_S.
/// Splitting S at i gives sum_k (-1)^k prefix(i, k) ^ suffix(i+1, d-1-k),
/// whose dual is Y_i up to normalization. Cost O(N 2^d d) for all nodes.
class FastDbodyKernel {
 public:
  explicit FastDbodyKernel(int d);

  int dimension() const { return basis_.dimension(); }
  const ExteriorBasis& basis() const { return basis_; }

  /// Writes Y into `out` (resized to d x N). Throws ValidationError if N < d.
  void drive(const Matrix& nodes, DriveField& out) const;
  DriveField drive(const Matrix& nodes) const;
  /// Potential through the top-degree prefix entry.
  double potential(const Matrix& nodes) const;

 private:
  ExteriorBasis basis_;
  double ordering_factor_;  // (d-1)!
};

DriveField dbody_drive_fast(const Matrix& nodes);
inline DriveField dbody_drive_fast(const Configuration& c) { return dbody_drive_fast(c.nodes()); }

/// max_i |A_i - B_i| / max_i |B_i| (absolute when B vanishes).
double relative_field_deviation(const DriveField& a, const DriveField& b);

/// Signature of an index tuple: parity of the sorting permutation, 0 when
/// any index repeats.
int tuple_signature(const std::vector<int>& indices);

}  // namespace spheresync
