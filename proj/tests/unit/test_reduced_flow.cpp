#include "doctest.h"

#include <cmath>

#include "spheresync/errors.hpp"
#include "spheresync/reduced_flow.hpp"

using namespace spheresync;

namespace {

ReducedState state_at(double u, double c1, double c2, double sign = 1.0) {
  const double p = 1 - (1 + c1 * c1 + c2 * c2) * u * u + 2 * c1 * c2 * u * u * u;
  return {u, sign * std::sqrt(p), c1, c2};
}

}  // namespace

TEST_CASE("cubic and potential values") {
  CHECK(cubic_p(0.0, 0.3, -0.2) == 1.0);
  CHECK(cubic_p(0.5, -0.75, 1.0 / 3) == doctest::Approx(1 - (1 + 0.5625 + 1.0 / 9) * 0.25 - 0.5 * 0.125));
  const double h = 1e-6;
  for (double u : {-0.4, 0.1, 0.6}) {
    CHECK(std::abs(cubic_p_derivative(u, 0.4, 0.7) - (cubic_p(u + h, 0.4, 0.7) - cubic_p(u - h, 0.4, 0.7)) / (2 * h)) <
          1e-8);
    CHECK(potential_V(u, 0.4, 0.7) == doctest::Approx(8 * u * u * cubic_p(u, 0.4, 0.7)));
  }
}

TEST_CASE("roots of the cubic") {
  const double c1 = -0.75, c2 = 1.0 / 3;
  const CubicRoots r = cubic_roots(c1, c2);
  CHECK(std::abs(r.r_minus + 0.905) < 1e-3);
  CHECK(std::abs(r.r_plus - 0.703) < 1e-3);
  CHECK(std::abs(cubic_p(r.r_minus, c1, c2)) < 1e-12);
  CHECK(std::abs(cubic_p(r.r_plus, c1, c2)) < 1e-12);
  REQUIRE(r.r3.has_value());
  // p(0) = 1 fixes the product of the roots
  CHECK(std::abs(*r.r3 + 1 / (2 * c1 * c2 * r.r_minus * r.r_plus)) < 1e-12);
  CHECK(*r.r3 < -1.0);
  for (double u : {-0.8, -0.2, 0.3, 0.65}) {
    const double factored = (1 - u / r.r_minus) * (1 - u / r.r_plus) * (1 - u / *r.r3);
    CHECK(std::abs(factored - cubic_p(u, c1, c2)) < 1e-12);
  }
  const CubicRoots q = cubic_roots(0.0, 0.5);
  CHECK_FALSE(q.r3.has_value());
  CHECK(std::abs(q.r_plus - 1 / std::sqrt(1.25)) < 1e-12);
  CHECK(std::abs(q.r_minus + 1 / std::sqrt(1.25)) < 1e-12);
  CHECK(*cubic_roots(0.5, 0.5).r3 > 1.0);
}

TEST_CASE("invariants of a triple") {
  Vector a(3), b(3), c(3);
  a << 1, 0, 0;
  b << 0.6, 0.8, 0;
  c << 0, 0.6, 0.8;
  const ReducedState s = constants_from_initial(a, b, c);
  CHECK(s.u == doctest::Approx(0.6));
  CHECK(s.c1 == doctest::Approx(0.48 / 0.6));
  CHECK(s.c2 == doctest::Approx(0.0));
  CHECK(s.x123 == doctest::Approx(0.64));
  CHECK(std::abs(s.x123 * s.x123 - cubic_p(s.u, s.c1, s.c2)) < 1e-12);

  const ReducedState same = constants_from_initial(a, a, a);
  CHECK(same.c1 == 1.0);
  CHECK(same.c2 == 1.0);
  CHECK(same.x123 == 0.0);

  CHECK_THROWS_AS(constants_from_initial(Configuration(Matrix::Identity(3, 3))), ValidationError);
  CHECK_FALSE(relabel_for_reduction(Configuration(Matrix::Identity(3, 3))).has_value());

  Matrix m(3, 3);
  m << a, Vector::Unit(3, 2), b;
  const auto relabelled = relabel_for_reduction(Configuration(m));
  REQUIRE(relabelled.has_value());
  CHECK(std::abs(relabelled->node(0).dot(relabelled->node(1))) > 0.1);
}

TEST_CASE("triple from invariants reproduces them") {
  const ReducedState s = state_at(0.5, -0.75, 1.0 / 3, -1.0);
  const Configuration x = triple_from_invariants(s);
  const ReducedState back = constants_from_initial(x);
  CHECK(std::abs(back.u - s.u) < 1e-12);
  CHECK(std::abs(back.c1 - s.c1) < 1e-12);
  CHECK(std::abs(back.c2 - s.c2) < 1e-12);
  CHECK(std::abs(back.x123 - s.x123) < 1e-12);
  CHECK_THROWS_AS(triple_from_invariants({0.5, 0.3, -0.75, 1.0 / 3}), ValidationError);
}

TEST_CASE("reduced flow") {
  const ReducedState s = state_at(0.5, -0.75, 1.0 / 3, -1.0);
  const CubicRoots roots = cubic_roots(s.c1, s.c2);
  const ReducedTrajectory t = evolve_reduced(s, 1e-3, 20.0, 10);
  CHECK(t.max_constraint_violation < 1e-8);
  CHECK(t.max_energy_violation < 1e-8);
  for (double u : t.u) {
    CHECK(u >= roots.r_minus - 1e-9);
    CHECK(u <= roots.r_plus + 1e-9);
  }
  // x123 only grows and u ends near zero
  for (std::size_t k = 1; k < t.x123.size(); ++k) CHECK(t.x123[k] >= t.x123[k - 1] - 1e-12);
  CHECK(std::abs(t.u.back()) < 1e-6);

  const ReducedTrajectory rest = evolve_reduced({0.0, 1.0, 0.2, 0.4}, 1e-2, 5.0);
  for (double u : rest.u) CHECK(u == 0.0);

  CHECK_THROWS_AS(evolve_reduced({0.5, 0.9, 0.2, 0.4}, 1e-2, 1.0), ValidationError);
  CHECK_THROWS_AS(evolve_reduced(s, 0.0, 1.0), ValidationError);
}

TEST_CASE("reduced flow matches the full three-node system") {
  const ReducedComparison cmp = compare_with_full(triple_from_invariants(state_at(0.5, -0.75, 1.0 / 3, -1.0)), 1e-3, 20.0);
  CHECK(cmp.max_u_deviation < 1e-6);
  CHECK(cmp.max_x123_deviation < 1e-6);
  CHECK(cmp.max_constant_drift < 1e-6);
  CHECK(cmp.final_gram_deviation < 1e-6);
  CHECK(cmp.x123_nondecreasing);
  CHECK(std::abs(cmp.final_lambda - 2.0) < 1e-6);
  CHECK_THROWS_AS(compare_with_full(Configuration(Matrix::Identity(3, 3)), 1e-3, 1.0), ValidationError);
}
