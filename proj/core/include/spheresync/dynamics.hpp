#pragma once

// Combined pairwise + d-body flow on S^{d-1}:
//
//   dx_i/dt = Omega_i x_i + kappa2 P_i(X_av) + kappaD P_i(Y_i),
//   P_i(y)  = y - x_i (x_i . y),
//
// integrated by fixed-step classical RK4 with per-node renormalization.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spheresync/interaction_kernels.hpp"
#include "spheresync/sphere_geometry.hpp"

namespace spheresync {

enum class FrequencyKind { none, d2_scalars, d3_vectors, general_matrix };

std::string to_string(FrequencyKind kind);
FrequencyKind frequency_kind_from_string(const std::string& name);

/// [[0, -w], [w, 0]]: rotates a d = 2 node at angular speed w.
Matrix frequency_matrix_d2(double omega);
/// The matrix with Omega x = omega x x.
Matrix frequency_matrix_d3(const Eigen::Vector3d& omega);

/// Seeded frequency matrices for N nodes.
///
/// d2_scalars: omega_i ~ U(-m, m). d3_vectors: components ~ U(-m/sqrt3, m/sqrt3)
/// so |omega_i| <= m. general_matrix: each upper-triangle entry ~ U(-s, s) with
/// s = m / sqrt(d(d-1)/2), antisymmetrized. none: empty list.
std::vector<Matrix> random_frequencies(FrequencyKind kind, int d, int n, double magnitude,
                                       std::uint64_t seed);

struct ModelParams {
  int d = 3;
  int n = 3;
  double kappa2 = 0.0;
  double kappa_d = 0.0;
  /// Empty means Omega_i = 0 for all nodes; otherwise one d x d
  /// antisymmetric matrix per node.
  std::vector<Matrix> frequencies;

  static ModelParams homogeneous(int d, int n, double kappa2, double kappa_d);

  /// Throws ValidationError on shape errors or non-antisymmetric Omega_i
  /// (tolerance 1e-12).
  void validate() const;
  bool has_frequencies() const { return !frequencies.empty(); }
  /// True when every Omega_i is the same matrix (or there are none).
  bool identical_frequencies() const;
  /// Largest |Omega_i| measured as |Omega_i|_F / sqrt2 (= |omega_i| for d = 2, 3).
  double max_frequency() const;
  /// 0.01 / max(|kappa2|, |kappaD|, max_frequency, 1).
  double default_dt() const;
  /// kappa2 V_2 / (2N) + kappaD V_d / (d N^{d-1}); non-decreasing along
  /// the flow when the Omega_i are identical.
  double lyapunov(const Matrix& nodes) const;
};

/// Holds the fast kernel and scratch space for one model.
class DynamicsEngine {
 public:
  explicit DynamicsEngine(ModelParams params);

  const ModelParams& params() const { return params_; }

  /// Right-hand side for every node, written into `out` (d x N).
  void rhs(const Matrix& nodes, Matrix& out) const;
  Matrix rhs(const Matrix& nodes) const;

  /// d-body drive through the naive enumerator (cross-check path).
  DriveField dbody_drive_reference(const Matrix& nodes) const;
  DriveField dbody_drive(const Matrix& nodes) const;

  /// One RK4 step followed by renormalization. `first_stage`, when given,
  /// must equal rhs(config) and saves one evaluation. Returns the largest
  /// renormalization correction | |x_i| - 1 | before rescaling.
  double step_in_place(Matrix& nodes, double dt, const Matrix* first_stage = nullptr) const;

 private:
  ModelParams params_;
  std::optional<FastDbodyKernel> kernel_;
  mutable Matrix k1_, k2_, k3_, k4_, stage_, drive_;
};

Matrix rhs(const Configuration& config, const ModelParams& params);

/// One fixed RK4 step of size dt > 0. Throws NumericalError on non-finite state.
Configuration step(const Configuration& config, const ModelParams& params, double dt);

struct SimulationOptions {
  double dt = 0.0;            ///< 0 selects ModelParams::default_dt()
  double t_max = 100.0;
  double steady_tol = 1e-9;   ///< stop once max_i |rhs_i| falls below
  bool stop_when_steady = true;
  int sample_stride = 10;     ///< steps between recorded samples
  int checkpoint_stride = 0;  ///< samples between stored configurations; 0 = none
  bool verify_naive = false;  ///< cross-run the naive d-body evaluator
  int verify_every = 1000;    ///< steps between naive cross-checks
  double verify_tolerance = 1e-10;
};

struct TrajectoryRecord {
  int d = 0;
  int n = 0;
  std::vector<double> times;
  std::vector<double> order_parameter;
  std::vector<double> potential_pair;
  std::vector<double> potential_dbody;
  std::vector<double> max_speed;
  std::vector<double> lyapunov;
  /// Sample rows that carry a stored configuration, and the configurations.
  std::vector<std::size_t> checkpoint_rows;
  std::vector<Matrix> checkpoints;

  bool converged = false;
  bool frequencies_identical = true;
  long steps = 0;
  double dt = 0.0;
  double final_time = 0.0;
  double max_norm_drift = 0.0;         ///< after renormalization
  double max_renormalization = 0.0;    ///< correction applied per step
  double max_naive_deviation = 0.0;    ///< 0 when verification was off
  int naive_checks = 0;

  std::size_t samples() const { return times.size(); }
};

struct SimulationResult {
  TrajectoryRecord record;
  Configuration final_state;
};

/// Integrates until max_i |rhs_i| < steady_tol or t = t_max. Non-convergence
/// is reported through record.converged, not thrown.
SimulationResult simulate(const Configuration& initial, const ModelParams& params,
                          const SimulationOptions& options);

struct MonotonicityReport {
  bool applicable = true;  ///< false when the Omega_i differ
  bool monotone = true;
  double largest_dip = 0.0;
  std::size_t worst_index = 0;
  double total_increase = 0.0;
};

/// Checks that the recorded Lyapunov series never drops by more than
/// `allowed_dip` between consecutive samples.
MonotonicityReport monotonicity_audit(const TrajectoryRecord& record, double allowed_dip = 1e-8);

}  // namespace spheresync
