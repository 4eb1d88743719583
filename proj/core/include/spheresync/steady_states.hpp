#pragma once

// Exact static configurations for d = 2..5 and their order parameters.
//
// Node indices follow i = 1..N in the closed-form expressions; the returned
// Configuration stores node i in column i-1.

#include <optional>
#include <string>

#include "spheresync/sphere_geometry.hpp"

namespace spheresync {

enum class Family {
  d2_splay,
  d2_combined,
  d3_ring,
  d3_combined,
  d4_torus,
  d4_combined,
  d5_ring,
  d5_combined,
  basis_Nd,
};

std::string to_string(Family family);
/// Throws ValidationError for unknown names.
Family family_from_string(const std::string& name);
/// Dimension of the family; 0 for basis_Nd (any d).
int family_dimension(Family family);

struct SteadyStateSpec {
  Family family = Family::d3_ring;
  int d = 3;
  int n = 3;
  double r_inf = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  /// d = 2: theta_0. d = 3, 5: azimuth added to every node. d = 4: unused.
  double phase0 = 0.0;
  /// -1 selects the mirror image that is stable for kappaD < 0: x -> -x for
  /// odd d, second coordinate negated for even d.
  int orientation = 1;

  /// Throws ValidationError on inconsistent parameters.
  void validate() const;
};

/// Parameters of the homogeneous member of a family (kappa2 = 0, kappaD > 0).
/// basis_Nd takes d from `d` and requires n == d; other families ignore `d`.
SteadyStateSpec homogeneous_spec(Family family, int n, int d = 0);

/// Family member that is static for the given couplings, or nullopt when the
/// closed form has no solution (beyond the critical ratio). For d = 2,
/// kappaD is the coefficient of the d-body term, i.e. minus kappa_a.
/// d4_combined has no closed form and throws unless kappa2 == 0.
std::optional<SteadyStateSpec> spec_for_couplings(Family family, int n, double kappa2, double kappa_d);

/// theta_0 that puts X_av of the d = 2 arc along the second axis.
double d2_centered_phase(int n, double alpha);

Configuration exact_configuration(const SteadyStateSpec& spec);

/// x_i . x_j straight from the family's closed form (independent of
/// exact_configuration).
Matrix closed_form_gram(const SteadyStateSpec& spec);

/// Closed-form order parameter for the family member static under
/// (kappa2, kappaD); nullopt beyond the critical ratio.
std::optional<double> r_infinity(Family family, int d, int n, double kappa2, double kappa_d);

/// sqrt of cos^2(t) S(alpha) + sin^2(t) S(3 beta), S(a) = sin^2(pi a/2) / (N^2 sin^2(pi a/2N)).
double d4_r_infinity(int n, double alpha, double beta, double theta);

/// Largest kappa2/|kappaD| admitting the partially synchronized family.
/// d = 3: (2/N) cot(pi/N). d = 5: max f times the geometric factor.
/// Other d throw ValidationError.
double critical_ratio(int d, int n);

/// f(x) = (1 - x^2)(5x^2 - 1)/x and its maximizer on (0, 1).
double d5_profile(double x);
double d5_profile_argmax();
/// 3 cos(2 pi/N) / (4 N^2 sin^2(pi/N)).
double d5_geometric_factor(int n);

/// Root of f(r) g(N) = ratio on the branch through r = 1/sqrt5; nullopt
/// above the critical ratio.
std::optional<double> solve_d5_rinf(int n, double kappa_ratio);

/// Arc spacing parameter for the d = 2 combined model with symmetric
/// coupling kappa_s and antisymmetric coupling kappa_a. |alpha| < 2.
double d2_alpha(double kappa_s, double kappa_a);

struct LambdaPair {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  /// max_i |S_i - lambda1 x_i + lambda2 X_av| / max_i |S_i|, where S_i is
  /// the unnormalized signature sum.
  double residual = 0.0;
  double absolute_residual = 0.0;
  /// |lambda2 - kappa2 N^{d-1}/kappaD| / max(|lambda1|, |target|, 1), when
  /// couplings are supplied.
  std::optional<double> consistency;
};

/// Fits sum eps v = lambda1 x_i - lambda2 X_av over every node. Throws
/// ValidationError when all nodes are parallel to X_av.
LambdaPair verify_lambda_relation(const Configuration& config);
LambdaPair verify_lambda_relation(const Configuration& config, double kappa2, double kappa_d);

/// Closed-form lambda pair of a cataloged state (throws for d4_combined
/// with theta, alpha, beta off the torus).
LambdaPair catalog_lambdas(const SteadyStateSpec& spec);

struct D4Fit {
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  double rms_residual = 0.0;
  double r_inf_predicted = 0.0;
  double r_inf_measured = 0.0;
  bool converged = false;
  bool degenerate = false;
  int starts = 0;
  std::string diagnostics;
};

/// Least-squares fit of cos^2(t) cos(a pi k/N) + sin^2(t) cos(3 b pi k/N)
/// to the measured Gram matrix. Parameters are reported with alpha, beta
/// >= 0, theta in [0, pi/2] and alpha <= 3 beta.
D4Fit fit_d4_parameters(const Configuration& config);

}  // namespace spheresync
