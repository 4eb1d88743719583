#include "spheresync/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "spheresync/errors.hpp"

namespace spheresync {

namespace {

constexpr double kStaticParallelTolerance = 1e-12;
constexpr double kLambdaTolerance = 1e-6;
constexpr double kPredictionTolerance = 1e-5;
constexpr double kFitTolerance = 1e-6;

bool all_parallel(const Matrix& x) {
  for (Eigen::Index i = 1; i < x.cols(); ++i) {
    if (std::abs(x.col(i).dot(x.col(0))) < 1.0 - kStaticParallelTolerance) return false;
  }
  return true;
}

void add_check(SummaryReport& report, std::string name, double value, double tolerance) {
  report.identity_checks.push_back({std::move(name), value, tolerance, value <= tolerance});
}

// Closed-form prediction of r for the equispaced family matching the model.
void predict_order(SummaryReport& report, const Configuration& final_state, const ModelParams& params) {
  if (params.has_frequencies() || params.kappa_d == 0.0) return;
  const int d = params.d;
  const int n = params.n;
  try {
    std::optional<SteadyStateSpec> spec;
    if (d == 2 && (params.kappa2 != 0.0)) spec = spec_for_couplings(Family::d2_combined, n, params.kappa2, params.kappa_d);
    if (d == 2 && params.kappa2 == 0.0) spec = spec_for_couplings(Family::d2_splay, n, 0.0, params.kappa_d);
    if (d == 3) spec = spec_for_couplings(Family::d3_combined, n, params.kappa2, params.kappa_d);
    if (d == 4 && params.kappa2 == 0.0) spec = spec_for_couplings(Family::d4_torus, n, 0.0, params.kappa_d);
    if (d == 5) spec = spec_for_couplings(Family::d5_combined, n, params.kappa2, params.kappa_d);
    if (spec) {
      report.r_inf_predicted = spec->r_inf;
      report.predicted_family = to_string(spec->family);
    }
  } catch (const ValidationError&) {
    // No closed-form family for these couplings.
  }
  if (d == 4) {
    report.d4_fit = fit_d4_parameters(final_state);
    add_check(report, "d4_gram_fit_rms", report.d4_fit->rms_residual, kFitTolerance);
    if (!report.r_inf_predicted) {
      report.r_inf_predicted = report.d4_fit->r_inf_predicted;
      report.predicted_family = "d4_combined (fitted)";
    }
  }
  if (report.r_inf_predicted) {
    add_check(report, "r_inf_vs_closed_form", std::abs(report.r_inf_measured - *report.r_inf_predicted),
              kPredictionTolerance);
  }
}

}  // namespace

std::string to_string(Classification c) {
  switch (c) {
    case Classification::complete: return "complete";
    case Classification::ring_equispaced: return "ring_equispaced";
    case Classification::balanced: return "balanced";
    case Classification::practical: return "practical";
    case Classification::asynchronous: return "asynchronous";
    case Classification::unstable_start: return "unstable_start";
  }
  return "asynchronous";
}

std::string to_string(Closure c) {
  switch (c) {
    case Closure::closed: return "closed";
    case Closure::anti_closed: return "anti_closed";
    case Closure::open: return "open";
  }
  return "open";
}

double order_parameter(const Matrix& nodes) { return nodes.rowwise().mean().norm(); }

SpacingReport spacing_report(const Configuration& config, double tolerance) {
  const Matrix& x = config.nodes();
  const int n = config.size();
  SpacingReport out;
  if (n < 2) return out;
  std::vector<double> gaps;
  gaps.reserve(static_cast<std::size_t>(n - 1));
  for (int i = 0; i + 1 < n; ++i) gaps.push_back((x.col(i) - x.col(i + 1)).norm());
  std::vector<double> sorted = gaps;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  out.median = (m % 2 == 1) ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  for (double g : gaps) out.max_deviation = std::max(out.max_deviation, std::abs(g - out.median));
  out.equispaced = out.max_deviation < tolerance;
  const double wrap = (x.col(n - 1) - x.col(0)).norm();
  const double anti = (x.col(n - 1) + x.col(0)).norm();
  if (std::abs(wrap - out.median) < tolerance) {
    out.closure = Closure::closed;
  } else if (std::abs(anti - out.median) < tolerance) {
    out.closure = Closure::anti_closed;
  }
  return out;
}

double trailing_band(const TrajectoryRecord& record, double fraction) {
  const auto& r = record.order_parameter;
  if (r.empty()) return 0.0;
  const auto size = r.size();
  auto start = static_cast<std::size_t>(std::floor((1.0 - fraction) * static_cast<double>(size)));
  start = std::min(start, size - 1);
  const auto [lo, hi] = std::minmax_element(r.begin() + static_cast<std::ptrdiff_t>(start), r.end());
  return *hi - *lo;
}

double d2_measured_alpha(const Configuration& config) {
  if (config.dimension() != 2) throw ValidationError("d2_measured_alpha needs d = 2");
  const Matrix& x = config.nodes();
  const int n = config.size();
  double total = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double cross = x(0, i) * x(1, i + 1) - x(1, i) * x(0, i + 1);
    const double dot = x.col(i).dot(x.col(i + 1));
    total += std::atan2(cross, dot);
  }
  return total / (n - 1) * n / std::numbers::pi;
}

SummaryReport classify_final(const TrajectoryRecord& record, const Configuration& final_state,
                             const ModelParams& params, const ClassifyOptions& options) {
  SummaryReport report;
  report.d = params.d;
  report.n = params.n;
  report.kappa2 = params.kappa2;
  report.kappa_d = params.kappa_d;
  report.converged = record.converged;
  report.final_time = record.final_time;
  report.r_inf_measured = order_parameter(final_state);
  report.r_band = trailing_band(record, options.window_fraction);
  report.band_definition = fmt::format("operational: max-min of r over the trailing {:.0f}% of samples, "
                                       "practical when below {}",
                                       100.0 * options.window_fraction, options.practical_band);

  const bool is_static = record.converged;
  const Matrix& x = final_state.nodes();

  if (is_static && record.steps == 0 && params.kappa_d != 0.0 && all_parallel(x)) {
    report.classification = Classification::unstable_start;
    return report;
  }
  if (!is_static) {
    report.classification =
        report.r_band < options.practical_band ? Classification::practical : Classification::asynchronous;
    return report;
  }
  if (report.r_inf_measured > 1.0 - options.complete_threshold) {
    report.classification = Classification::complete;
    return report;
  }

  report.spacing = spacing_report(final_state, options.spacing_tolerance);
  if (report.spacing->equispaced) {
    report.classification = Classification::ring_equispaced;
    if (params.d == 2) report.d2_alpha_measured = d2_measured_alpha(final_state);
    try {
      report.lambda = params.kappa_d != 0.0
                          ? verify_lambda_relation(final_state, params.kappa2, params.kappa_d)
                          : verify_lambda_relation(final_state);
      add_check(report, "lambda_residual", report.lambda->residual, kLambdaTolerance);
      if (report.lambda->consistency) {
        add_check(report, "lambda2_consistency", *report.lambda->consistency, kLambdaTolerance);
      }
    } catch (const ValidationError&) {
      report.lambda.reset();
    }
    predict_order(report, final_state, params);
    return report;
  }
  report.classification = report.r_inf_measured < options.balanced_threshold ? Classification::balanced
                                                                              : Classification::asynchronous;
  return report;
}

}  // namespace spheresync
