#include "spheresync/steady_states.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "spheresync/errors.hpp"
#include "spheresync/interaction_kernels.hpp"

namespace spheresync {

namespace {

using std::numbers::pi;

constexpr double kConsistencyTolerance = 1e-12;

constexpr std::array<std::pair<Family, const char*>, 9> kFamilyNames{{
    {Family::d2_splay, "d2_splay"},
    {Family::d2_combined, "d2_combined"},
    {Family::d3_ring, "d3_ring"},
    {Family::d3_combined, "d3_combined"},
    {Family::d4_torus, "d4_torus"},
    {Family::d4_combined, "d4_combined"},
    {Family::d5_ring, "d5_ring"},
    {Family::d5_combined, "d5_combined"},
    {Family::basis_Nd, "basis_Nd"},
}};

double cot(double x) { return std::cos(x) / std::sin(x); }

// sin^2(pi a/2) / (N^2 sin^2(pi a/2N)), with the a -> 0 limit 1.
double arc_order_squared(int n, double a) {
  if (std::abs(a) < 1e-14) return 1.0;
  const double num = std::sin(pi * a / 2.0);
  const double den = static_cast<double>(n) * std::sin(pi * a / (2.0 * n));
  return (num * num) / (den * den);
}

double d2_order(int n, double alpha) { return std::sqrt(arc_order_squared(n, alpha)); }

bool is_d2(Family f) { return f == Family::d2_splay || f == Family::d2_combined; }
bool is_d3(Family f) { return f == Family::d3_ring || f == Family::d3_combined; }
bool is_d4(Family f) { return f == Family::d4_torus || f == Family::d4_combined; }
bool is_d5(Family f) { return f == Family::d5_ring || f == Family::d5_combined; }

int orientation_of(double kappa_d) {
  if (kappa_d == 0.0) throw ValidationError("this family requires a nonzero d-body coupling");
  return kappa_d > 0.0 ? 1 : -1;
}

// r at given kappa2/|kappa3|; caller checks existence.
double d3_combined_r(int n, double ratio) {
  const double t = std::tan(pi / n);
  const double a = ratio * n * t;
  return a / 6.0 + std::sqrt(a * a + 12.0) / 6.0;
}

void check_close(double got, double want, const char* what, Family f) {
  if (!(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)))) {
    throw ValidationError(fmt::format("{}: {} = {} inconsistent with expected {}", to_string(f), what, got, want));
  }
}

}  // namespace

std::string to_string(Family family) {
  for (const auto& [f, name] : kFamilyNames) {
    if (f == family) return name;
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  for (const auto& [f, label] : kFamilyNames) {
    if (name == label) return f;
  }
  throw ValidationError(fmt::format("unknown steady-state family '{}'", name));
}

int family_dimension(Family family) {
  if (is_d2(family)) return 2;
  if (is_d3(family)) return 3;
  if (is_d4(family)) return 4;
  if (is_d5(family)) return 5;
  return 0;
}

void SteadyStateSpec::validate() const {
  const int fd = family_dimension(family);
  if (fd != 0 && d != fd) {
    throw ValidationError(fmt::format("{} requires d = {} (got {})", to_string(family), fd, d));
  }
  if (d < 2) throw ValidationError("dimension must be at least 2");
  if (family == Family::basis_Nd && n != d) {
    throw ValidationError(fmt::format("basis_Nd requires N = d (got N = {}, d = {})", n, d));
  }
  if (n < d) throw ValidationError(fmt::format("N = {} must be at least d = {}", n, d));
  if (orientation != 1 && orientation != -1) throw ValidationError("orientation must be +1 or -1");
  if (!(r_inf > 0.0 && r_inf <= 1.0 + 1e-12)) {
    throw ValidationError(fmt::format("r_inf = {} outside (0, 1]", r_inf));
  }

  if (is_d3(family) || is_d5(family)) {
    const double closure = r_inf * r_inf * (1.0 + alpha * alpha);
    if (!(std::abs(closure - 1.0) <= kConsistencyTolerance)) {
      throw ValidationError(
          fmt::format("{}: r_inf^2 (1 + alpha^2) = {} must equal 1", to_string(family), closure));
    }
  }
  switch (family) {
    case Family::d3_ring:
      check_close(r_inf, 1.0 / std::sqrt(3.0), "r_inf", family);
      break;
    case Family::d5_ring:
      check_close(r_inf, 1.0 / std::sqrt(5.0), "r_inf", family);
      break;
    case Family::d2_splay:
      if (std::abs(alpha) != 1.0) throw ValidationError("d2_splay requires alpha = +1 or -1");
      [[fallthrough]];
    case Family::d2_combined:
      if (!(std::abs(alpha) < 2.0)) throw ValidationError("d2 arc parameter must satisfy |alpha| < 2");
      check_close(r_inf, d2_order(n, alpha), "r_inf", family);
      break;
    case Family::d4_torus:
      check_close(alpha, 1.0, "alpha", family);
      check_close(beta, 1.0, "beta", family);
      check_close(theta, pi / 4.0, "theta", family);
      [[fallthrough]];
    case Family::d4_combined:
      check_close(r_inf, d4_r_infinity(n, alpha, beta, theta), "r_inf", family);
      break;
    case Family::basis_Nd:
      check_close(r_inf, 1.0 / std::sqrt(static_cast<double>(d)), "r_inf", family);
      break;
    default:
      break;
  }
}

double d2_centered_phase(int n, double alpha) {
  return pi / 2.0 - (n + 1) * alpha * pi / (2.0 * n);
}

SteadyStateSpec homogeneous_spec(Family family, int n, int d) {
  SteadyStateSpec s;
  s.family = family;
  s.n = n;
  s.d = family_dimension(family);
  switch (family) {
    case Family::d2_splay:
    case Family::d2_combined:
      s.alpha = 1.0;
      s.r_inf = d2_order(n, 1.0);
      s.phase0 = d2_centered_phase(n, 1.0);
      break;
    case Family::d3_ring:
    case Family::d3_combined:
      s.r_inf = 1.0 / std::sqrt(3.0);
      s.alpha = std::sqrt(2.0);
      break;
    case Family::d4_torus:
    case Family::d4_combined:
      s.alpha = 1.0;
      s.beta = 1.0;
      s.theta = pi / 4.0;
      s.r_inf = d4_r_infinity(n, 1.0, 1.0, pi / 4.0);
      break;
    case Family::d5_ring:
    case Family::d5_combined:
      s.r_inf = 1.0 / std::sqrt(5.0);
      s.alpha = 2.0;
      break;
    case Family::basis_Nd:
      s.d = d > 0 ? d : n;
      s.r_inf = 1.0 / std::sqrt(static_cast<double>(s.d));
      break;
  }
  s.validate();
  return s;
}

std::optional<SteadyStateSpec> spec_for_couplings(Family family, int n, double kappa2, double kappa_d) {
  switch (family) {
    case Family::d2_splay: {
      if (kappa2 != 0.0) return std::nullopt;
      SteadyStateSpec s = homogeneous_spec(family, n);
      s.alpha = orientation_of(kappa_d);
      s.r_inf = d2_order(n, s.alpha);
      s.phase0 = d2_centered_phase(n, s.alpha);
      s.validate();
      return s;
    }
    case Family::d2_combined: {
      SteadyStateSpec s = homogeneous_spec(family, n);
      s.alpha = d2_alpha(kappa2, -kappa_d);
      s.r_inf = d2_order(n, s.alpha);
      s.phase0 = d2_centered_phase(n, s.alpha);
      s.validate();
      return s;
    }
    case Family::d3_ring:
    case Family::d4_torus:
    case Family::d5_ring:
    case Family::basis_Nd: {
      if (kappa2 != 0.0) return std::nullopt;
      SteadyStateSpec s = homogeneous_spec(family, n);
      s.orientation = orientation_of(kappa_d);
      return s;
    }
    case Family::d3_combined: {
      const int orientation = orientation_of(kappa_d);
      const double ratio = kappa2 / std::abs(kappa_d);
      if (ratio > critical_ratio(3, n)) return std::nullopt;
      SteadyStateSpec s = homogeneous_spec(family, n);
      s.orientation = orientation;
      s.r_inf = std::min(1.0, d3_combined_r(n, ratio));
      s.alpha = std::sqrt(std::max(0.0, 1.0 / (s.r_inf * s.r_inf) - 1.0));
      s.validate();
      return s;
    }
    case Family::d4_combined: {
      const int orientation = orientation_of(kappa_d);
      if (kappa2 != 0.0) {
        throw ValidationError("d4_combined has no closed form for kappa2 != 0; use fit_d4_parameters");
      }
      SteadyStateSpec s = homogeneous_spec(family, n);
      s.orientation = orientation;
      return s;
    }
    case Family::d5_combined: {
      const int orientation = orientation_of(kappa_d);
      const auto r = solve_d5_rinf(n, kappa2 / std::abs(kappa_d));
      if (!r) return std::nullopt;
      SteadyStateSpec s = homogeneous_spec(family, n);
      s.orientation = orientation;
      s.r_inf = *r;
      s.alpha = std::sqrt(std::max(0.0, 1.0 / (*r * *r) - 1.0));
      s.validate();
      return s;
    }
  }
  return std::nullopt;
}

Configuration exact_configuration(const SteadyStateSpec& spec) {
  spec.validate();
  const int d = spec.d;
  const int n = spec.n;
  Matrix x(d, n);
  for (int col = 0; col < n; ++col) {
    const double i = col + 1;
    switch (spec.family) {
      case Family::d2_splay:
      case Family::d2_combined: {
        const double th = spec.phase0 + i * spec.alpha * pi / n;
        x(0, col) = std::cos(th);
        x(1, col) = std::sin(th);
        break;
      }
      case Family::d3_ring:
      case Family::d3_combined: {
        const double ph = 2.0 * pi * i / n + spec.phase0;
        x(0, col) = spec.r_inf * spec.alpha * std::cos(ph);
        x(1, col) = spec.r_inf * spec.alpha * std::sin(ph);
        x(2, col) = spec.r_inf;
        break;
      }
      case Family::d4_torus:
      case Family::d4_combined: {
        const double a = spec.alpha * pi * i / n;
        const double b = 3.0 * spec.beta * pi * i / n;
        x(0, col) = std::cos(spec.theta) * std::cos(a);
        x(1, col) = std::cos(spec.theta) * std::sin(a);
        x(2, col) = std::sin(spec.theta) * std::cos(b);
        x(3, col) = std::sin(spec.theta) * std::sin(b);
        break;
      }
      case Family::d5_ring:
      case Family::d5_combined: {
        const double ph = 2.0 * pi * i / n + spec.phase0;
        const double w = spec.r_inf * spec.alpha / std::sqrt(2.0);
        x(0, col) = w * std::cos(ph);
        x(1, col) = w * std::sin(ph);
        x(2, col) = w * std::cos(2.0 * ph);
        x(3, col) = w * std::sin(2.0 * ph);
        x(4, col) = spec.r_inf;
        break;
      }
      case Family::basis_Nd:
        x.col(col).setZero();
        x(col, col) = 1.0;
        break;
    }
  }
  if (spec.orientation < 0) {
    if (d % 2 == 1) {
      x = -x;
    } else {
      x.row(1) = -x.row(1);
    }
  }
  return Configuration(std::move(x));
}

Matrix closed_form_gram(const SteadyStateSpec& spec) {
  spec.validate();
  const int n = spec.n;
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double k = i - j;
      double v = 0.0;
      switch (spec.family) {
        case Family::d2_splay:
        case Family::d2_combined:
          v = std::cos(spec.alpha * pi * k / n);
          break;
        case Family::d3_ring:
        case Family::d3_combined:
          v = spec.r_inf * spec.r_inf * (1.0 + spec.alpha * spec.alpha * std::cos(2.0 * pi * k / n));
          break;
        case Family::d4_torus:
        case Family::d4_combined: {
          const double c = std::cos(spec.theta);
          const double s = std::sin(spec.theta);
          v = c * c * std::cos(spec.alpha * pi * k / n) + s * s * std::cos(3.0 * spec.beta * pi * k / n);
          break;
        }
        case Family::d5_ring:
        case Family::d5_combined: {
          const double h = 0.5 * spec.alpha * spec.alpha;
          v = spec.r_inf * spec.r_inf *
              (1.0 + h * std::cos(2.0 * pi * k / n) + h * std::cos(4.0 * pi * k / n));
          break;
        }
        case Family::basis_Nd:
          v = (i == j) ? 1.0 : 0.0;
          break;
      }
      g(i, j) = v;
    }
  }
  return g;
}

double d4_r_infinity(int n, double alpha, double beta, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return std::sqrt(c * c * arc_order_squared(n, alpha) + s * s * arc_order_squared(n, 3.0 * beta));
}

std::optional<double> r_infinity(Family family, int d, int n, double kappa2, double kappa_d) {
  const int fd = family_dimension(family);
  if (fd != 0 && fd != d) {
    throw ValidationError(fmt::format("{} requires d = {} (got {})", to_string(family), fd, d));
  }
  if (family == Family::basis_Nd) {
    if (n != d) throw ValidationError("basis_Nd requires N = d");
    if (kappa2 != 0.0) return std::nullopt;
    return 1.0 / std::sqrt(static_cast<double>(d));
  }
  const auto spec = spec_for_couplings(family, n, kappa2, kappa_d);
  if (!spec) return std::nullopt;
  return spec->r_inf;
}

double critical_ratio(int d, int n) {
  if (n < d) throw ValidationError(fmt::format("N = {} must be at least d = {}", n, d));
  if (d == 3) return 2.0 / n * cot(pi / n);
  if (d == 5) return d5_profile(d5_profile_argmax()) * d5_geometric_factor(n);
  throw ValidationError(fmt::format("no closed-form critical ratio for d = {}", d));
}

double d5_profile(double x) { return (1.0 - x * x) * (5.0 * x * x - 1.0) / x; }

double d5_profile_argmax() { return std::sqrt((3.0 + 2.0 * std::sqrt(6.0)) / 15.0); }

double d5_geometric_factor(int n) {
  const double s = std::sin(pi / n);
  return 3.0 * std::cos(2.0 * pi / n) / (4.0 * n * n * s * s);
}

std::optional<double> solve_d5_rinf(int n, double kappa_ratio) {
  if (n < 5) throw ValidationError(fmt::format("d = 5 states need N >= 5 (got {})", n));
  const double g = d5_geometric_factor(n);
  if (!(g > 0.0)) throw ValidationError("degenerate geometric factor");
  const double target = kappa_ratio / g;
  const double top = d5_profile_argmax();
  if (target > d5_profile(top)) return std::nullopt;
  // f increases monotonically from -inf to its maximum on (0, top].
  // Bisect down to adjacent doubles: near r = 0 the slope grows like 1/r^2.
  double lo = 1e-300;
  double hi = top;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (d5_profile(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double d2_alpha(double kappa_s, double kappa_a) {
  if (kappa_s == 0.0 && kappa_a == 0.0) throw ValidationError("d2_alpha needs a nonzero coupling");
  if (kappa_s == 0.0) return kappa_a > 0.0 ? -1.0 : 1.0;
  const double base = -(2.0 / pi) * std::atan(kappa_a / kappa_s);
  if (kappa_s > 0.0) return base;
  if (kappa_a > 0.0) return -2.0 + base;
  if (kappa_a < 0.0) return 2.0 + base;
  // kappa_a = 0 with repulsive symmetric coupling: no arc state.
  throw ValidationError("kappa_s < 0 with kappa_a = 0 has no arc steady state");
}

namespace {

LambdaPair fit_lambdas(const Configuration& config) {
  const Matrix& x = config.nodes();
  const int d = config.dimension();
  const int n = config.size();
  const Matrix s = dbody_drive_fast(x) * std::pow(static_cast<double>(n), d - 1);
  const Vector mean = config.average();

  const Eigen::Index rows = static_cast<Eigen::Index>(d) * n;
  Matrix a(rows, 2);
  Vector b(rows);
  for (int i = 0; i < n; ++i) {
    a.block(static_cast<Eigen::Index>(i) * d, 0, d, 1) = x.col(i);
    a.block(static_cast<Eigen::Index>(i) * d, 1, d, 1) = -mean;
    b.segment(static_cast<Eigen::Index>(i) * d, d) = s.col(i);
  }

  LambdaPair out;
  if (mean.norm() < 1e-12) {
    out.lambda1 = a.col(0).dot(b) / a.col(0).squaredNorm();
  } else {
    const Eigen::Matrix2d normal = a.transpose() * a;
    const double scale = normal(0, 0) * normal(1, 1);
    if (!(normal.determinant() > 1e-12 * scale)) {
      throw ValidationError("lambda fit is degenerate: every node is parallel to X_av");
    }
    const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(b);
    out.lambda1 = sol[0];
    out.lambda2 = sol[1];
  }

  double misfit = 0.0;
  double size = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector r = s.col(i) - out.lambda1 * x.col(i) + out.lambda2 * mean;
    misfit = std::max(misfit, r.norm());
    size = std::max(size, s.col(i).norm());
  }
  out.absolute_residual = misfit;
  out.residual = size > 0.0 ? misfit / size : misfit;
  return out;
}

}  // namespace

LambdaPair verify_lambda_relation(const Configuration& config) { return fit_lambdas(config); }

LambdaPair verify_lambda_relation(const Configuration& config, double kappa2, double kappa_d) {
  LambdaPair out = fit_lambdas(config);
  if (kappa_d == 0.0) throw ValidationError("consistency check needs kappaD != 0");
  const double target = kappa2 * std::pow(static_cast<double>(config.size()), config.dimension() - 1) / kappa_d;
  const double scale = std::max({std::abs(out.lambda1), std::abs(target), 1.0});
  out.consistency = std::abs(out.lambda2 - target) / scale;
  return out;
}

LambdaPair catalog_lambdas(const SteadyStateSpec& spec) {
  spec.validate();
  const double n = spec.n;
  const double r = spec.r_inf;
  LambdaPair out;
  switch (spec.family) {
    case Family::d2_splay:
    case Family::d2_combined:
      out.lambda1 = cot(spec.alpha * pi / (2.0 * n));
      out.lambda2 = n * std::cos(spec.alpha * pi / 2.0) / std::sin(spec.alpha * pi / 2.0);
      break;
    case Family::d3_ring:
    case Family::d3_combined: {
      const double c = cot(pi / n);
      out.lambda1 = 2.0 * n * r * c;
      out.lambda2 = n * c * (3.0 * r * r - 1.0) / r;
      break;
    }
    case Family::d4_torus:
    case Family::d4_combined:
      if (spec.family == Family::d4_combined &&
          (spec.alpha != 1.0 || spec.beta != 1.0 || spec.theta != pi / 4.0)) {
        throw ValidationError("closed-form lambdas exist only for the d = 4 torus");
      }
      out.lambda1 = 1.5 * n * cot(1.5 * pi / n) * cot(0.5 * pi / n);
      break;
    case Family::d5_ring:
    case Family::d5_combined: {
      const double s = std::sin(pi / n);
      const double geo = 3.0 * n * n * std::cos(2.0 * pi / n) / (s * s);
      out.lambda1 = r * (1.0 - r * r) * geo;
      out.lambda2 = (1.0 - r * r) * (5.0 * r * r - 1.0) / r * geo / 4.0;
      break;
    }
    case Family::basis_Nd: {
      double f = 1.0;
      for (int k = 2; k < spec.d; ++k) f *= k;
      out.lambda1 = f;
      break;
    }
  }
  if (spec.orientation < 0) {
    out.lambda1 = -out.lambda1;
    out.lambda2 = -out.lambda2;
  }
  return out;
}

}  // namespace spheresync
