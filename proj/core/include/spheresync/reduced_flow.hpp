#pragma once

// Exact reduction of the three-node, d = 3 flow to the invariants
// u = x_12 and x_123, with constants of motion c1 = x_23/x_12 and
// c2 = x_13/x_12:
//
//   du/dt = -4 u x_123,   dx_123/dt = -2 u p'(u),
//   p(u) = 1 - (1 + c1^2 + c2^2) u^2 + 2 c1 c2 u^3,   x_123^2 = p(u).
//
// The time scale matches the full system with kappa3 / N^2 = 1.

#include <optional>
#include <vector>

#include "spheresync/sphere_geometry.hpp"

namespace spheresync {

struct ReducedState {
  double u = 0.0;
  double x123 = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

struct CubicRoots {
  double r_minus = 0.0;  ///< in [-1, 0)
  double r_plus = 0.0;   ///< in (0, 1]
  /// Third root, outside (-1, 1); absent when c1 c2 = 0 (p is quadratic).
  std::optional<double> r3;
};

/// Invariants of the initial triple. Throws ValidationError when x_12 = 0.
ReducedState constants_from_initial(const Vector& x1, const Vector& x2, const Vector& x3);
ReducedState constants_from_initial(const Configuration& triple);

/// Cyclic relabelling (i -> i+1) that makes x_12 nonzero, or nullopt when
/// every pair product vanishes (orthonormal triple, already synchronized).
std::optional<Configuration> relabel_for_reduction(const Configuration& triple);

double cubic_p(double u, double c1, double c2);
double cubic_p_derivative(double u, double c1, double c2);
/// V(u) = 8 u^2 p(u), so that (du/dt)^2 = 2 V(u).
double potential_V(double u, double c1, double c2);

/// Roots of p adjacent to 0, by bisection on the intervals where p is
/// monotone; r3 from the product of the roots.
CubicRoots cubic_roots(double c1, double c2);

struct ReducedTrajectory {
  std::vector<double> times;
  std::vector<double> u;
  std::vector<double> x123;
  double max_constraint_violation = 0.0;  ///< max |x_123^2 - p(u)|
  double max_energy_violation = 0.0;      ///< max |(du/dt)^2 - 2V(u)|
};

/// RK4 integration of (u, x_123). Throws ValidationError unless
/// |x_123^2 - p(u)| <= 1e-10 initially, dt > 0 and t_max > 0.
ReducedTrajectory evolve_reduced(const ReducedState& initial, double dt, double t_max, int sample_stride = 1);

/// A triple of unit 3-vectors with x_12 = u, x_13 = c2 u, x_23 = c1 u and
/// the given triple product (Cholesky factor of the Gram matrix).
/// Requires |u| < 1 and x_123^2 = p(u) within 1e-10.
Configuration triple_from_invariants(const ReducedState& state);

struct ReducedComparison {
  ReducedState initial;
  ReducedTrajectory reduced;
  std::vector<double> u_full;
  std::vector<double> x123_full;
  double max_u_deviation = 0.0;
  double max_x123_deviation = 0.0;
  double max_constant_drift = 0.0;   ///< on c1, c2 along the full flow
  double final_gram_deviation = 0.0; ///< max |G - I| at the end of the full run
  double final_lambda = 0.0;
  bool x123_nondecreasing = true;
  double u_min = 0.0;
  double u_max = 0.0;
};

/// Integrates the full three-node system (kappa3 = 9, so kappa3/N^2 = 1)
/// and the reduced flow with the same step and compares them at every
/// step. Throws ValidationError for triples without a valid reduction.
ReducedComparison compare_with_full(const Configuration& triple, double dt, double t_max);

}  // namespace spheresync
