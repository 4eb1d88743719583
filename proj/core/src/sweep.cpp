#include "spheresync/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "spheresync/errors.hpp"

namespace spheresync {

std::vector<double> grid(double from, double to, double step) {
  if (!(step > 0.0)) throw ValidationError("grid step must be positive");
  if (to < from) throw ValidationError("grid end must not precede its start");
  const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) out.push_back(from + static_cast<double>(k) * step);
  return out;
}

int sweep_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPHERESYNC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw ValidationError(fmt::format("SPHERESYNC_THREADS must be a positive integer (got '{}')", env));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

ModelParams base_model(const SweepRequest& request) {
  ModelParams base = ModelParams::homogeneous(request.d, request.n, 0.0, 0.0);
  base.frequencies = random_frequencies(request.frequencies.kind, request.d, request.n,
                                        request.frequencies.magnitude, request.frequencies.seed);
  return base;
}

SweepPoint run_point(const Configuration& start, ModelParams p, double kappa2, double kappa_d,
                     const SimulationOptions& options) {
  p.kappa2 = kappa2;
  p.kappa_d = kappa_d;
  const SimulationResult run = simulate(start, p, options);
  return {kappa2, kappa_d, classify_final(run.record, run.final_state, p)};
}

bool synchronized(const SweepPoint& p) {
  const Classification c = p.summary.classification;
  return c != Classification::asynchronous && c != Classification::unstable_start;
}

}  // namespace

std::vector<SweepPoint> run_sweep(const SweepRequest& request) {
  if (request.kappa2_values.empty() || request.kappa_d_values.empty()) {
    throw ValidationError("sweep grid is empty");
  }
  std::vector<SweepPoint> points;
  for (double kd : request.kappa_d_values) {
    for (double k2 : request.kappa2_values) points.push_back({k2, kd, {}});
  }
  const Configuration start = random_unit_configuration(request.d, request.n, request.seed);
  const ModelParams base = base_model(request);

  const int workers = std::min<int>(sweep_thread_count(request.threads), static_cast<int>(points.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    try {
      for (std::size_t k = next++; k < points.size(); k = next++) {
        points[k] = run_point(start, base, points[k].kappa2, points[k].kappa_d, request.simulation);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return points;
}

ThresholdBracket bisect_sync_threshold(const SweepRequest& request, double kappa2, double from, double to,
                                       int iterations) {
  if (iterations < 0) throw ValidationError("iterations must be non-negative");
  if (from == to) throw ValidationError("threshold search needs distinct end points");
  const Configuration start = random_unit_configuration(request.d, request.n, request.seed);
  const ModelParams base = base_model(request);
  ThresholdBracket out;
  out.probes.push_back(run_point(start, base, kappa2, from, request.simulation));
  out.probes.push_back(run_point(start, base, kappa2, to, request.simulation));
  out.asynchronous_at = from;
  out.synchronized_at = to;
  out.bracketed = !synchronized(out.probes[0]) && synchronized(out.probes[1]);
  if (!out.bracketed) return out;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (out.asynchronous_at + out.synchronized_at);
    out.probes.push_back(run_point(start, base, kappa2, mid, request.simulation));
    if (synchronized(out.probes.back())) {
      out.synchronized_at = mid;
    } else {
      out.asynchronous_at = mid;
    }
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "kappa2,kappa_d,ratio,r_inf,r_predicted,classification,converged,final_time,r_band\n";
  for (const auto& p : points) {
    const double ratio = p.kappa_d != 0.0 ? p.kappa2 / std::abs(p.kappa_d) : 0.0;
    const std::string predicted = p.summary.r_inf_predicted ? fmt::format("{:.17g}", *p.summary.r_inf_predicted) : "";
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{:.17g},{:.17g}\n", p.kappa2, p.kappa_d, ratio,
                       p.summary.r_inf_measured, predicted, to_string(p.summary.classification),
                       p.summary.converged ? 1 : 0, p.summary.final_time, p.summary.r_band);
  }
  return out;
}

}  // namespace spheresync
