#pragma once

// Points on the unit sphere S^{d-1}: configurations of N unit d-vectors,
// the (d-1)-fold Hodge dual, rotational invariants, alignment rotations and
// the Hopf projection S^3 -> S^2.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace spheresync {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Norm tolerance shared by every unit-vector invariant in the library.
inline constexpr double kUnitNormTolerance = 1e-12;

/// A single point of S^{d-1}. Construction normalizes the input.
class UnitVector {
 public:
  explicit UnitVector(Vector components);

  int dimension() const { return static_cast<int>(components_.size()); }
  const Vector& components() const { return components_; }
  double operator[](int a) const { return components_[a]; }

 private:
  Vector components_;
};

/// N unit d-vectors stored as the columns of a d x N matrix.
///
/// Invariants: d >= 2, N >= d, every column has unit norm to within
/// kUnitNormTolerance. Columns are normalized on construction; zero or
/// non-finite columns are rejected.
class Configuration {
 public:
  explicit Configuration(Matrix nodes);

  int dimension() const { return static_cast<int>(nodes_.rows()); }
  int size() const { return static_cast<int>(nodes_.cols()); }
  const Matrix& nodes() const { return nodes_; }
  auto node(int i) const { return nodes_.col(i); }

  /// X_av = (1/N) sum_j x_j.
  Vector average() const;

  /// Applies x_i -> R x_i for every node (R need not be proper).
  Configuration transformed(const Matrix& rotation) const;

  /// Rescales every column back to unit length.
  void renormalize();

 private:
  Matrix nodes_;
};

/// Proper rotation: orthonormal columns and determinant +1, both within 1e-10.
class RotationMatrix {
 public:
  explicit RotationMatrix(Matrix entries);
  static RotationMatrix identity(int d);

  int dimension() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  Vector apply(const Vector& v) const { return entries_ * v; }
  Configuration apply(const Configuration& c) const { return c.transformed(entries_); }

 private:
  Matrix entries_;
};

/// Generator of the rotations that tilt the last axis m = (0,...,0,1).
///
/// Omega has the block form [[0, w], [-w^T, 0]] with w a (d-1)-vector, so
/// Omega^3 = -|w|^2 Omega and exp(t Omega) = I + b(t) Omega + c(t) Omega^2
/// with b = sin(|w| t)/|w| and c = (1 - cos(|w| t))/|w|^2.
class AlignmentGenerator {
 public:
  explicit AlignmentGenerator(Vector omega);

  /// The generator whose exponential maps m onto the unit vector n.
  static AlignmentGenerator tilting_axis_to(const Vector& n);

  int dimension() const { return static_cast<int>(omega_.size()) + 1; }
  const Vector& omega() const { return omega_; }
  double angle() const { return omega_.norm(); }
  Matrix generator() const;
  /// exp(t Omega) through the closed-form quadratic expansion.
  Matrix exp(double t) const;

 private:
  Vector omega_;
};

/// sin(x)/x, evaluated by series for |x| < 1e-4.
double sinc(double x);
/// (1 - cos x)/x^2, evaluated by series for |x| < 1e-4.
double versine_ratio(double x);

/// The vector v with u.v = det(u, x_2, ..., x_d) for every u.
///
/// `vectors` holds the d-1 inputs as columns of a d x (d-1) matrix. The
/// result is multilinear and totally antisymmetric in the inputs and
/// vanishes when they are linearly dependent. For d = 3 this is the cross
/// product. Throws ValidationError on a shape mismatch with `dimension`.
Vector hodge_dual(const Matrix& vectors, int dimension);

/// Gram matrix x_i.x_j plus, for d = 3 on request, all triple products.
struct GramInvariants {
  Matrix gram;
  /// x_ijk = x_i.(x_j x x_k) stored at [(i*N + j)*N + k]; empty unless requested.
  std::vector<double> triples;
  int size = 0;

  double triple(int i, int j, int k) const {
    return triples[(static_cast<std::size_t>(i) * size + j) * size + k];
  }
};

GramInvariants gram_invariants(const Configuration& config, bool with_triples = false);

/// x_i . (x_j x x_k) for a d = 3 configuration.
double triple_product(const Configuration& config, int i, int j, int k);

struct Alignment {
  RotationMatrix rotation;
  Configuration rotated;
  AlignmentGenerator generator;
};

/// Rotates the configuration so that n = X_av/|X_av| lands on (0,...,0,1).
///
/// R = exp(-Omega) with Omega from AlignmentGenerator::tilting_axis_to(n).
/// Throws ValidationError when |X_av| < 1e-12 (balanced configuration).
Alignment align_to_axis(const Configuration& config);

/// align_to_axis followed by the residual SO(d-1) rotation about the last
/// axis that puts the transverse part of the final node on the positive
/// first axis (no-op when that part vanishes or d = 2).
Alignment canonical_orientation(const Configuration& config);

struct ReferenceFit {
  Matrix transform;      ///< orthogonal matrix Q minimizing |Q X - Y|_F
  bool proper = true;    ///< det Q = +1 (false: a reflection was required)
  double rms_mismatch = 0.0;
};

/// Orthogonal Procrustes fit of a configuration onto a reference with the
/// same node count (Kabsch). Used to bring a simulated state into a closed
/// form coordinate frame that is not fixed by X_av alone.
ReferenceFit fit_to_reference(const Configuration& config, const Configuration& reference);

/// Hopf projection (x,y,z,w) -> (2(xz-yw), 2(xw+yz), x^2+y^2-z^2-w^2).
/// Throws ValidationError unless the input is a 4-vector.
UnitVector hopf_map(const UnitVector& x);

/// N independent uniform draws on S^{d-1} (normalized Gaussian triples from
/// spheresync::Rng). Throws ValidationError when d < 2 or N < d.
Configuration random_unit_configuration(int d, int n, std::uint64_t seed);

}  // namespace spheresync
