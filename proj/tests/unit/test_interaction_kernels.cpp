#include "doctest.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "spheresync/errors.hpp"
#include "spheresync/interaction_kernels.hpp"
#include "spheresync/random.hpp"
#include "spheresync/steady_states.hpp"

using namespace spheresync;
using std::numbers::pi;

namespace {

// Independent brute force: all ordered d-tuples, determinant via LU.
double brute_potential(const Matrix& x) {
  const int d = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  double total = 0.0;
  while (true) {
    const int s = tuple_signature(idx);
    if (s != 0) {
      Matrix m(d, d);
      for (int a = 0; a < d; ++a) m.col(a) = x.col(idx[static_cast<std::size_t>(a)]);
      total += s * m.determinant();
    }
    int k = d - 1;
    while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == n) idx[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
  return total;
}

double cot(double x) { return std::cos(x) / std::sin(x); }

}  // namespace

TEST_CASE("tuple signature") {
  CHECK(tuple_signature({0, 1, 2}) == 1);
  CHECK(tuple_signature({1, 0, 2}) == -1);
  CHECK(tuple_signature({2, 0, 1}) == 1);
  CHECK(tuple_signature({0, 0, 2}) == 0);
  CHECK(tuple_signature({5, 9, 2, 7}) == -1);
}

TEST_CASE("pairwise potential and drive") {
  Matrix same = Matrix::Zero(3, 4);
  same.row(1).setOnes();
  CHECK(potential_pairwise(same) == doctest::Approx(16.0));
  CHECK((pairwise_drive(same).col(2) - Vector::Unit(3, 1)).norm() < 1e-15);

  Matrix antipodal(3, 2);
  antipodal << 1, -1, 0, 0, 0, 0;
  CHECK(std::abs(potential_pairwise(antipodal)) < 1e-15);
  CHECK(pairwise_drive(antipodal).norm() < 1e-15);

  const Configuration x = random_unit_configuration(3, 7, 5);
  double loops = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) loops += x.node(i).dot(x.node(j));
  CHECK(std::abs(potential_pairwise(x) - loops) < 1e-12);
  CHECK(std::abs(potential_pairwise(x) - 49.0 * x.average().squaredNorm()) < 1e-12);
  const DriveField y = pairwise_drive(x);
  for (int i = 0; i < 7; ++i) CHECK((y.col(i) - x.nodes().rowwise().mean()).norm() < 1e-15);
}

TEST_CASE("d-body potential against brute-force enumeration") {
  CHECK(potential_dbody(Configuration(Matrix::Identity(3, 3))) == doctest::Approx(6.0));
  Matrix same = Matrix::Zero(4, 6);
  same.row(0).setOnes();
  CHECK(std::abs(potential_dbody(same)) < 1e-15);
  for (int d = 2; d <= 5; ++d) {
    CAPTURE(d);
    const Configuration x = random_unit_configuration(d, d + 2, 70 + d);
    const double want = brute_potential(x.nodes());
    CHECK(std::abs(potential_dbody(x) - want) < 1e-10 * std::max(1.0, std::abs(want)));
    CHECK(std::abs(potential_dbody_naive(x.nodes()) - want) < 1e-10 * std::max(1.0, std::abs(want)));
  }
  CHECK_THROWS_AS(potential_dbody(Matrix::Identity(4, 3)), ValidationError);
}

TEST_CASE("fast and naive drives agree") {
  Rng pick(99);
  for (int d = 2; d <= 5; ++d) {
    for (int k = 0; k < 100; ++k) {
      const int n = d + static_cast<int>(pick.uniform() * (14 - d + 1));
      const Configuration x = random_unit_configuration(d, n, 5000u + 100u * d + k);
      const double dev = relative_field_deviation(dbody_drive_fast(x), dbody_drive_naive(x));
      CHECK_MESSAGE(dev < 1e-10, "d=" << d << " N=" << n);
    }
  }
  CHECK(relative_field_deviation(dbody_drive_fast(random_unit_configuration(5, 12, 1)),
                                 dbody_drive_naive(random_unit_configuration(5, 12, 1))) < 1e-10);
  CHECK(relative_field_deviation(dbody_drive_fast(random_unit_configuration(6, 8, 1)),
                                 dbody_drive_naive(random_unit_configuration(6, 8, 1))) < 1e-10);
}

TEST_CASE("wedge tables: degree zero is one and the full prefix is the elementary sum") {
  const Configuration x = random_unit_configuration(3, 5, 2);
  const ExteriorBasis basis(3);
  const WedgeTables t(basis, x.nodes(), 3);
  for (int m = 0; m <= 5; ++m) {
    CHECK(t.prefix(m)[basis.offset(0)] == 1.0);
    CHECK(t.suffix(m)[basis.offset(0)] == 1.0);
  }
  // degree 1 is the plain vector sum; degree 3 is the sum of determinants over sorted triples
  for (int a = 0; a < 3; ++a) CHECK(std::abs(t.prefix(5)[basis.offset(1) + a] - x.nodes().row(a).sum()) < 1e-14);
  double dets = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      for (int k = j + 1; k < 5; ++k) {
        Matrix m(3, 3);
        m << x.node(i), x.node(j), x.node(k);
        dets += m.determinant();
      }
  CHECK(std::abs(t.prefix(5)[basis.offset(3)] - dets) < 1e-14);
  CHECK(std::abs(t.suffix(0)[basis.offset(3)] - dets) < 1e-14);
}

TEST_CASE("drive is the scaled gradient of the potential") {
  const double h = 1e-5;
  for (int d = 2; d <= 5; ++d) {
    CAPTURE(d);
    const Configuration x = random_unit_configuration(d, d + 2, 300 + d);
    const DriveField y = dbody_drive_fast(x);
    const double scale = d * std::pow(static_cast<double>(x.size()), d - 1);
    double worst = 0.0;
    for (int i = 0; i < x.size(); ++i) {
      for (int a = 0; a < d; ++a) {
        Matrix up = x.nodes(), dn = x.nodes();
        up(a, i) += h;
        dn(a, i) -= h;
        worst = std::max(worst, std::abs((brute_potential(up) - brute_potential(dn)) / (2 * h) / scale - y(a, i)));
      }
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("drive contracted with its own node gives the potential") {
  for (int d = 2; d <= 5; ++d) {
    const Configuration x = random_unit_configuration(d, d + 3, 900 + d);
    const DriveField y = dbody_drive_fast(x);
    double contracted = 0.0;
    for (int i = 0; i < x.size(); ++i) contracted += x.node(i).dot(y.col(i));
    const double want = potential_dbody(x) / std::pow(static_cast<double>(x.size()), d - 1);
    CHECK(std::abs(contracted - want) < 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("rotation and reflection covariance of the drive") {
  for (int d = 3; d <= 5; ++d) {
    CAPTURE(d);
    Rng rng(11 + d);
    Matrix a = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        a(i, j) = rng.uniform(-1, 1);
        a(j, i) = -a(i, j);
      }
    const Matrix r = a.exp();
    const Configuration x = random_unit_configuration(d, d + 4, 17 + d);
    const DriveField y = dbody_drive_fast(x);
    CHECK(relative_field_deviation(dbody_drive_fast(x.transformed(r)), r * y) < 1e-12);

    Matrix flip = Matrix::Identity(d, d);
    flip(d - 1, d - 1) = -1.0;
    CHECK(relative_field_deviation(dbody_drive_fast(x.transformed(flip)), -(flip * y)) < 1e-12);
    CHECK(std::abs(potential_dbody(x.transformed(flip)) + potential_dbody(x)) < 1e-10);
  }
}

TEST_CASE("parallel nodes give zero drive") {
  Matrix m = Matrix::Zero(4, 6);
  m.row(2).setOnes();
  m.col(3) *= -1.0;
  CHECK(dbody_drive_fast(m).norm() < 1e-15);
  CHECK(dbody_drive_naive(m).norm() < 1e-15);
}

TEST_CASE("drive on closed-form states") {
  SUBCASE("three-body ring") {
    for (int n : {3, 7, 200}) {
      CAPTURE(n);
      const Configuration x = exact_configuration(homogeneous_spec(Family::d3_ring, n));
      const DriveField y = dbody_drive_fast(x);
      const double c = 2.0 / (n * std::sqrt(3.0)) * cot(pi / n);
      CHECK((y - c * x.nodes()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("four-body torus") {
    for (int n : {4, 9}) {
      const Configuration x = exact_configuration(homogeneous_spec(Family::d4_torus, n));
      const double c = 3.0 / (2.0 * n * n) * cot(1.5 * pi / n) * cot(0.5 * pi / n);
      CHECK((dbody_drive_naive(x) - c * x.nodes()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((dbody_drive_fast(x) - c * x.nodes()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("planar splay") {
    const int n = 40;
    const Configuration x = exact_configuration(homogeneous_spec(Family::d2_splay, n));
    const DriveField s = n * dbody_drive_fast(x);
    CHECK((s - cot(pi / (2.0 * n)) * x.nodes()).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("kernels reject N < d") {
  CHECK_THROWS_AS(dbody_drive_fast(Matrix::Identity(4, 3)), ValidationError);
  CHECK_THROWS_AS(dbody_drive_naive(Matrix::Identity(4, 3)), ValidationError);
}
