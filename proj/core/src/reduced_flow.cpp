#include "spheresync/reduced_flow.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "spheresync/dynamics.hpp"
#include "spheresync/errors.hpp"
#include "spheresync/steady_states.hpp"

namespace spheresync {

namespace {

constexpr double kRootTolerance = 1e-15;

double bisect_root(double lo, double hi, double c1, double c2) {
  // p(lo) > 0 >= p(hi) or the reverse; keeps the sign change bracketed.
  const bool rising = cubic_p(lo, c1, c2) < cubic_p(hi, c1, c2);
  for (int it = 0; it < 200 && std::abs(hi - lo) > kRootTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = cubic_p(mid, c1, c2);
    if ((v > 0.0) != rising) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct Derivative {
  double du;
  double dx;
};

Derivative reduced_rhs(double u, double x, double c1, double c2) {
  return {-4.0 * u * x, -2.0 * u * cubic_p_derivative(u, c1, c2)};
}

void check_triple(const Configuration& triple) {
  if (triple.dimension() != 3 || triple.size() != 3) {
    throw ValidationError("the reduction needs exactly three nodes in d = 3");
  }
}

}  // namespace

ReducedState constants_from_initial(const Vector& x1, const Vector& x2, const Vector& x3) {
  if (x1.size() != 3 || x2.size() != 3 || x3.size() != 3) {
    throw ValidationError("the reduction needs 3-vectors");
  }
  const double x12 = x1.dot(x2);
  if (x12 == 0.0) {
    throw ValidationError("x_12 = 0: reduction coordinates are degenerate; relabel the nodes");
  }
  const Eigen::Vector3d a = x1;
  const Eigen::Vector3d b = x2;
  const Eigen::Vector3d c = x3;
  ReducedState s;
  s.u = x12;
  s.c1 = x2.dot(x3) / x12;
  s.c2 = x1.dot(x3) / x12;
  s.x123 = a.dot(b.cross(c));
  return s;
}

ReducedState constants_from_initial(const Configuration& triple) {
  check_triple(triple);
  return constants_from_initial(triple.node(0), triple.node(1), triple.node(2));
}

std::optional<Configuration> relabel_for_reduction(const Configuration& triple) {
  check_triple(triple);
  Matrix x = triple.nodes();
  for (int shift = 0; shift < 3; ++shift) {
    if (x.col(0).dot(x.col(1)) != 0.0) return Configuration(x);
    Matrix next(3, 3);
    next << x.col(1), x.col(2), x.col(0);
    x = next;
  }
  return std::nullopt;
}

double cubic_p(double u, double c1, double c2) {
  return 1.0 - (1.0 + c1 * c1 + c2 * c2) * u * u + 2.0 * c1 * c2 * u * u * u;
}

double cubic_p_derivative(double u, double c1, double c2) {
  return -2.0 * (1.0 + c1 * c1 + c2 * c2) * u + 6.0 * c1 * c2 * u * u;
}

double potential_V(double u, double c1, double c2) { return 8.0 * u * u * cubic_p(u, c1, c2); }

CubicRoots cubic_roots(double c1, double c2) {
  const double a = 1.0 + c1 * c1 + c2 * c2;
  const double k = c1 * c2;
  // p' vanishes at 0 and at u* = A / (3 c1 c2); p is monotone between.
  double upper = 1.0;
  double lower = -1.0;
  if (k > 0.0) upper = std::min(1.0, a / (3.0 * k));
  if (k < 0.0) lower = std::max(-1.0, a / (3.0 * k));

  CubicRoots roots;
  roots.r_plus = bisect_root(0.0, upper, c1, c2);
  roots.r_minus = bisect_root(lower, 0.0, c1, c2);
  if (k != 0.0) roots.r3 = -1.0 / (2.0 * k * roots.r_minus * roots.r_plus);
  return roots;
}

ReducedTrajectory evolve_reduced(const ReducedState& initial, double dt, double t_max, int sample_stride) {
  if (!(dt > 0.0) || !(t_max > 0.0)) throw ValidationError("dt and t_max must be positive");
  if (sample_stride < 1) throw ValidationError("sample_stride must be at least 1");
  const double c1 = initial.c1;
  const double c2 = initial.c2;
  const double mismatch = std::abs(initial.x123 * initial.x123 - cubic_p(initial.u, c1, c2));
  if (mismatch > 1e-10) {
    throw ValidationError(fmt::format("inconsistent reduced state: |x123^2 - p(u)| = {:.3e}", mismatch));
  }

  ReducedTrajectory out;
  double u = initial.u;
  double x = initial.x123;
  const long steps = static_cast<long>(std::ceil(t_max / dt - 1e-9));
  auto record = [&](long k) {
    out.times.push_back(static_cast<double>(k) * dt);
    out.u.push_back(u);
    out.x123.push_back(x);
  };
  auto audit = [&] {
    out.max_constraint_violation = std::max(out.max_constraint_violation, std::abs(x * x - cubic_p(u, c1, c2)));
    const double du = -4.0 * u * x;
    out.max_energy_violation = std::max(out.max_energy_violation, std::abs(du * du - 2.0 * potential_V(u, c1, c2)));
  };

  record(0);
  audit();
  for (long k = 1; k <= steps; ++k) {
    const Derivative k1 = reduced_rhs(u, x, c1, c2);
    const Derivative k2 = reduced_rhs(u + 0.5 * dt * k1.du, x + 0.5 * dt * k1.dx, c1, c2);
    const Derivative k3 = reduced_rhs(u + 0.5 * dt * k2.du, x + 0.5 * dt * k2.dx, c1, c2);
    const Derivative k4 = reduced_rhs(u + dt * k3.du, x + dt * k3.dx, c1, c2);
    u += dt / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
    x += dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    if (!std::isfinite(u) || !std::isfinite(x)) throw NumericalError("reduced flow became non-finite");
    audit();
    if (k % sample_stride == 0 || k == steps) record(k);
  }
  return out;
}

Configuration triple_from_invariants(const ReducedState& s) {
  if (!(std::abs(s.u) < 1.0)) throw ValidationError("triple_from_invariants needs |u| < 1");
  const double mismatch = std::abs(s.x123 * s.x123 - cubic_p(s.u, s.c1, s.c2));
  if (mismatch > 1e-10) {
    throw ValidationError(fmt::format("inconsistent invariants: |x123^2 - p(u)| = {:.3e}", mismatch));
  }
  const double x12 = s.u;
  const double x13 = s.c2 * s.u;
  const double x23 = s.c1 * s.u;
  const double w = std::sqrt(1.0 - x12 * x12);
  const double y3 = (x23 - x12 * x13) / w;
  const double z3 = s.x123 / w;
  Matrix x(3, 3);
  x << 1.0, x12, x13,
       0.0, w, y3,
       0.0, 0.0, z3;
  return Configuration(std::move(x));
}

ReducedComparison compare_with_full(const Configuration& triple, double dt, double t_max) {
  check_triple(triple);
  ReducedComparison out;
  out.initial = constants_from_initial(triple);
  const double c1 = out.initial.c1;
  const double c2 = out.initial.c2;
  out.reduced = evolve_reduced(out.initial, dt, t_max, 1);

  const DynamicsEngine engine(ModelParams::homogeneous(3, 3, 0.0, 9.0));
  Matrix nodes = triple.nodes();
  const std::size_t samples = out.reduced.times.size();
  out.u_full.reserve(samples);
  out.x123_full.reserve(samples);
  out.u_min = out.u_max = out.initial.u;
  for (std::size_t k = 0; k < samples; ++k) {
    if (k > 0) engine.step_in_place(nodes, dt);
    const Eigen::Vector3d a = nodes.col(0);
    const Eigen::Vector3d b = nodes.col(1);
    const Eigen::Vector3d c = nodes.col(2);
    const double u = a.dot(b);
    const double x = a.dot(b.cross(c));
    out.u_full.push_back(u);
    out.x123_full.push_back(x);
    out.max_u_deviation = std::max(out.max_u_deviation, std::abs(u - out.reduced.u[k]));
    out.max_x123_deviation = std::max(out.max_x123_deviation, std::abs(x - out.reduced.x123[k]));
    if (std::abs(u) > 1e-3) {
      out.max_constant_drift = std::max(
          {out.max_constant_drift, std::abs(b.dot(c) / u - c1), std::abs(a.dot(c) / u - c2)});
    }
    out.u_min = std::min(out.u_min, out.reduced.u[k]);
    out.u_max = std::max(out.u_max, out.reduced.u[k]);
    if (k > 0 && out.reduced.x123[k] < out.reduced.x123[k - 1] - 1e-12) out.x123_nondecreasing = false;
  }
  const Configuration final_state(nodes);
  const Matrix gram = nodes.transpose() * nodes;
  out.final_gram_deviation = (gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff();
  out.final_lambda = verify_lambda_relation(final_state).lambda1;
  return out;
}

}  // namespace spheresync
