#pragma once

// Order parameter, final-state classification, and the trigonometric
// identity table used as a self-check.

#include <optional>
#include <string>
#include <vector>

#include "spheresync/dynamics.hpp"
#include "spheresync/steady_states.hpp"

namespace spheresync {

enum class Classification { complete, ring_equispaced, balanced, practical, asynchronous, unstable_start };

std::string to_string(Classification c);

/// |(1/N) sum_j x_j|.
double order_parameter(const Matrix& nodes);
inline double order_parameter(const Configuration& c) { return order_parameter(c.nodes()); }

enum class Closure { closed, anti_closed, open };
std::string to_string(Closure c);

struct SpacingReport {
  double median = 0.0;
  double max_deviation = 0.0;  ///< max_i | |x_i - x_{i+1}| - median |
  bool equispaced = false;
  /// closed: |x_N - x_1| matches the spacing; anti_closed: |x_N + x_1| does.
  Closure closure = Closure::open;
};

SpacingReport spacing_report(const Configuration& config, double tolerance = 1e-5);

/// max - min of r(t) over the trailing `fraction` of the recorded samples.
double trailing_band(const TrajectoryRecord& record, double fraction = 0.1);

struct ClassifyOptions {
  double complete_threshold = 1e-4;
  double balanced_threshold = 1e-4;
  double spacing_tolerance = 1e-5;
  /// Operational definition: band of r(t) over the trailing window.
  double practical_band = 0.05;
  double window_fraction = 0.1;
};

struct IdentityCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct SummaryReport {
  Classification classification = Classification::asynchronous;
  int d = 0;
  int n = 0;
  double kappa2 = 0.0;
  double kappa_d = 0.0;
  bool converged = false;
  double final_time = 0.0;
  double r_inf_measured = 0.0;
  double r_band = 0.0;
  std::string band_definition;
  std::optional<SpacingReport> spacing;
  std::optional<LambdaPair> lambda;
  std::optional<double> r_inf_predicted;
  std::string predicted_family;
  std::optional<D4Fit> d4_fit;
  /// d = 2 only: fitted arc parameter alpha from r and the spacing.
  std::optional<double> d2_alpha_measured;
  std::vector<IdentityCheck> identity_checks;
};

/// Decision rules, in order:
///   static at t = 0 from an all-parallel state with kappaD != 0 -> unstable_start
///   static, r > 1 - 1e-4                   -> complete
///   static, equal consecutive spacing      -> ring_equispaced
///   static, r < 1e-4                       -> balanced
///   moving, trailing r band < 0.05         -> practical
///   otherwise                              -> asynchronous
SummaryReport classify_final(const TrajectoryRecord& record, const Configuration& final_state,
                             const ModelParams& params, const ClassifyOptions& options = {});

/// Signed arc parameter of a d = 2 equispaced state: the phase step between
/// consecutive nodes, times N/pi.
double d2_measured_alpha(const Configuration& config);

struct OracleCheck {
  std::string name;
  std::string case_label;
  double residual = 0.0;
  bool passed = false;
};

struct OracleTable {
  std::vector<OracleCheck> checks;
  double tolerance = 1e-9;
  bool all_passed() const;
  double worst_residual() const;
  std::size_t failures() const;
};

/// Closed-form trigonometric and signature sums against direct
/// enumeration: geometric cosine/sine sums, the double cosine sum, the
/// three-index and four-index signature sums with odd frequencies, the
/// splay identity and the five-index cosine sum behind the d = 5 lambdas.
/// Residuals are relative to max(1, |reference|).
OracleTable trig_oracles(double tolerance = 1e-9);

}  // namespace spheresync
