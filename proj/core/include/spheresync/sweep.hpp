#pragma once

// Parameter sweeps over (kappa2, kappaD). Points run on worker threads,
// each with its own engine; results come back in grid order.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spheresync/analysis.hpp"
#include "spheresync/io.hpp"

namespace spheresync {

struct SweepRequest {
  int d = 3;
  int n = 40;
  std::vector<double> kappa2_values;
  std::vector<double> kappa_d_values;
  FrequencySpec frequencies;
  SimulationOptions simulation;
  /// Every point starts from the same seeded random state, so results do
  /// not depend on scheduling.
  std::uint64_t seed = 1;
  /// 0: SPHERESYNC_THREADS if set, else hardware concurrency.
  int threads = 0;
};

struct SweepPoint {
  double kappa2 = 0.0;
  double kappa_d = 0.0;
  SummaryReport summary;
};

/// Inclusive arithmetic grid from..to with the given step (step > 0).
std::vector<double> grid(double from, double to, double step);

/// Thread count from an explicit request or the environment.
int sweep_thread_count(int requested);

std::vector<SweepPoint> run_sweep(const SweepRequest& request);

struct ThresholdBracket {
  /// Last kappaD classified asynchronous and first classified synchronized
  /// (practical, complete, ring, or balanced).
  double asynchronous_at = 0.0;
  double synchronized_at = 0.0;
  /// False when the end points do not straddle the transition.
  bool bracketed = false;
  std::vector<SweepPoint> probes;
};

/// Bisection in kappaD between `from` (expected asynchronous) and `to`
/// (expected synchronized) at fixed kappa2, using the request's d, N,
/// frequencies, integration options and seed. Assumes a single crossing;
/// no particular threshold value is implied.
ThresholdBracket bisect_sync_threshold(const SweepRequest& request, double kappa2, double from, double to,
                                       int iterations = 10);

/// kappa2,kappa_d,ratio,r_inf,r_predicted,classification,converged,final_time,r_band
std::string sweep_csv(const std::vector<SweepPoint>& points);

}  // namespace spheresync
