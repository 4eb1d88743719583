#include "spheresync/sphere_geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "dual_detail.hpp"
#include "spheresync/errors.hpp"
#include "spheresync/random.hpp"

namespace spheresync {

namespace {

constexpr double kRotationTolerance = 1e-10;
constexpr double kBalancedThreshold = 1e-12;
constexpr double kSeriesThreshold = 1e-4;

Vector normalized_or_throw(Vector v, const char* what) {
  const double norm = v.norm();
  if (!std::isfinite(norm) || norm == 0.0) {
    throw ValidationError(fmt::format("{}: vector is zero or non-finite", what));
  }
  return v / norm;
}

/// Rotation in the plane of unit vectors a and b taking a onto b.
Matrix plane_rotation(const Vector& a, const Vector& b) {
  const int n = static_cast<int>(a.size());
  const double c = a.dot(b);
  if (c > -1.0 + 1e-12) {
    const Matrix k = b * a.transpose() - a * b.transpose();
    return Matrix::Identity(n, n) + k + k * k / (1.0 + c);
  }
  // Antipodal: half-turn in the plane of a and any orthogonal axis.
  Vector helper = Vector::Zero(n);
  int axis = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(a[i]) < std::abs(a[axis])) axis = i;
  helper[axis] = 1.0;
  Vector e = helper - a * a.dot(helper);
  e.normalize();
  return Matrix::Identity(n, n) - 2.0 * a * a.transpose() - 2.0 * e * e.transpose();
}

}  // namespace

UnitVector::UnitVector(Vector components)
    : components_(normalized_or_throw(std::move(components), "UnitVector")) {}

Configuration::Configuration(Matrix nodes) : nodes_(std::move(nodes)) {
  const int d = dimension();
  const int n = size();
  if (d < 2) throw ValidationError(fmt::format("dimension d = {} must be at least 2", d));
  if (n < d) {
    throw ValidationError(fmt::format("node count N = {} must be at least d = {}", n, d));
  }
  for (int i = 0; i < n; ++i) {
    const double norm = nodes_.col(i).norm();
    if (!std::isfinite(norm) || norm == 0.0) {
      throw ValidationError(fmt::format("node {} is zero or non-finite", i));
    }
    nodes_.col(i) /= norm;
  }
}

Vector Configuration::average() const { return nodes_.rowwise().mean(); }

Configuration Configuration::transformed(const Matrix& rotation) const {
  if (rotation.rows() != dimension() || rotation.cols() != dimension()) {
    throw ValidationError("rotation size does not match configuration dimension");
  }
  return Configuration(rotation * nodes_);
}

void Configuration::renormalize() { nodes_.colwise().normalize(); }

RotationMatrix::RotationMatrix(Matrix entries) : entries_(std::move(entries)) {
  const int d = static_cast<int>(entries_.rows());
  if (entries_.cols() != d) throw ValidationError("rotation matrix must be square");
  const double orth = (entries_.transpose() * entries_ - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (orth > kRotationTolerance) {
    throw ValidationError(fmt::format("matrix is not orthogonal (deviation {:.3e})", orth));
  }
  const double det = entries_.determinant();
  if (std::abs(det - 1.0) > kRotationTolerance) {
    throw ValidationError(fmt::format("rotation determinant {} is not +1", det));
  }
}

RotationMatrix RotationMatrix::identity(int d) { return RotationMatrix(Matrix::Identity(d, d)); }

double sinc(double x) {
  if (std::abs(x) < kSeriesThreshold) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double versine_ratio(double x) {
  if (std::abs(x) < kSeriesThreshold) {
    const double x2 = x * x;
    return 0.5 - x2 / 24.0 + x2 * x2 / 720.0;
  }
  return (1.0 - std::cos(x)) / (x * x);
}

AlignmentGenerator::AlignmentGenerator(Vector omega) : omega_(std::move(omega)) {
  if (omega_.size() < 1) throw ValidationError("alignment generator needs d >= 2");
}

AlignmentGenerator AlignmentGenerator::tilting_axis_to(const Vector& n) {
  const int d = static_cast<int>(n.size());
  const Vector unit = normalized_or_throw(n, "alignment target");
  const Vector transverse = unit.head(d - 1);
  const double s = transverse.norm();
  const double angle = std::atan2(s, unit[d - 1]);
  Vector omega = Vector::Zero(d - 1);
  if (s > 0.0) {
    omega = transverse * (angle / s);
  } else if (unit[d - 1] < 0.0) {
    omega[0] = std::numbers::pi;
  }
  return AlignmentGenerator(std::move(omega));
}

Matrix AlignmentGenerator::generator() const {
  const int d = dimension();
  Matrix g = Matrix::Zero(d, d);
  g.block(0, d - 1, d - 1, 1) = omega_;
  g.block(d - 1, 0, 1, d - 1) = -omega_.transpose();
  return g;
}

Matrix AlignmentGenerator::exp(double t) const {
  const int d = dimension();
  const double w = angle();
  const Matrix g = generator();
  // b(t) = sin(wt)/w = t sinc(wt), c(t) = (1-cos wt)/w^2 = t^2 versine_ratio(wt).
  const double b = t * sinc(w * t);
  const double c = t * t * versine_ratio(w * t);
  return Matrix::Identity(d, d) + b * g + c * (g * g);
}

Vector hodge_dual(const Matrix& vectors, int dimension) {
  if (dimension < 2) throw ValidationError("hodge_dual needs d >= 2");
  if (vectors.rows() != dimension || vectors.cols() != dimension - 1) {
    throw ValidationError(fmt::format("hodge_dual expects {} vectors of length {}, got {} of length {}",
                                      dimension - 1, dimension, vectors.cols(), vectors.rows()));
  }
  std::vector<const double*> cols(static_cast<std::size_t>(dimension - 1));
  for (int c = 0; c < dimension - 1; ++c) cols[c] = vectors.col(c).data();
  Vector out(dimension);
  detail::hodge_dual_columns(dimension, cols.data(), out.data());
  return out;
}

GramInvariants gram_invariants(const Configuration& config, bool with_triples) {
  GramInvariants inv;
  inv.size = config.size();
  inv.gram = config.nodes().transpose() * config.nodes();
  if (with_triples) {
    if (config.dimension() != 3) throw ValidationError("triple products require d = 3");
    const int n = config.size();
    inv.triples.assign(static_cast<std::size_t>(n) * n * n, 0.0);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Eigen::Vector3d cross =
            Eigen::Vector3d(config.node(j)).cross(Eigen::Vector3d(config.node(k)));
        for (int i = 0; i < n; ++i) {
          inv.triples[(static_cast<std::size_t>(i) * n + j) * n + k] = config.node(i).dot(cross);
        }
      }
    }
  }
  return inv;
}

double triple_product(const Configuration& config, int i, int j, int k) {
  if (config.dimension() != 3) throw ValidationError("triple products require d = 3");
  const Eigen::Vector3d xi = config.node(i);
  return xi.dot(Eigen::Vector3d(config.node(j)).cross(Eigen::Vector3d(config.node(k))));
}

Alignment align_to_axis(const Configuration& config) {
  const Vector average = config.average();
  const double r = average.norm();
  if (r < kBalancedThreshold) {
    throw ValidationError(
        fmt::format("balanced configuration (|X_av| = {:.3e}); no normal to align", r));
  }
  AlignmentGenerator generator = AlignmentGenerator::tilting_axis_to(average / r);
  RotationMatrix rotation(generator.exp(-1.0));
  Configuration rotated = rotation.apply(config);
  return Alignment{std::move(rotation), std::move(rotated), std::move(generator)};
}

Alignment canonical_orientation(const Configuration& config) {
  Alignment aligned = align_to_axis(config);
  const int d = config.dimension();
  if (d == 2) return aligned;
  const Vector transverse = aligned.rotated.node(config.size() - 1).head(d - 1);
  const double s = transverse.norm();
  if (s < 1e-12) return aligned;
  Vector e1 = Vector::Zero(d - 1);
  e1[0] = 1.0;
  Matrix spin = Matrix::Identity(d, d);
  spin.topLeftCorner(d - 1, d - 1) = plane_rotation(transverse / s, e1);
  RotationMatrix total(spin * aligned.rotation.matrix());
  Configuration rotated = total.apply(config);
  return Alignment{std::move(total), std::move(rotated), std::move(aligned.generator)};
}

ReferenceFit fit_to_reference(const Configuration& config, const Configuration& reference) {
  if (config.dimension() != reference.dimension() || config.size() != reference.size()) {
    throw ValidationError("fit_to_reference: configurations differ in shape");
  }
  const Matrix cross = reference.nodes() * config.nodes().transpose();
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix q = svd.matrixU() * svd.matrixV().transpose();
  ReferenceFit fit;
  fit.proper = q.determinant() > 0.0;
  fit.transform = q;
  fit.rms_mismatch = std::sqrt((q * config.nodes() - reference.nodes()).squaredNorm() /
                               static_cast<double>(config.size()));
  return fit;
}

UnitVector hopf_map(const UnitVector& p) {
  if (p.dimension() != 4) {
    throw ValidationError(fmt::format("hopf_map expects a 4-vector, got dimension {}", p.dimension()));
  }
  const double x = p[0], y = p[1], z = p[2], w = p[3];
  Vector out(3);
  out << 2.0 * (x * z - y * w), 2.0 * (x * w + y * z), x * x + y * y - z * z - w * w;
  return UnitVector(std::move(out));
}

Configuration random_unit_configuration(int d, int n, std::uint64_t seed) {
  if (d < 2) throw ValidationError(fmt::format("dimension d = {} must be at least 2", d));
  if (n < d) {
    throw ValidationError(fmt::format("node count N = {} must be at least d = {}", n, d));
  }
  Rng rng(seed);
  Matrix nodes(d, n);
  for (int i = 0; i < n; ++i) {
    do {
      for (int a = 0; a < d; ++a) nodes(a, i) = rng.gaussian();
    } while (nodes.col(i).norm() < 1e-12);
  }
  return Configuration(std::move(nodes));
}

}  // namespace spheresync
