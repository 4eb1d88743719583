#include "spheresync/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "spheresync/errors.hpp"
#include "spheresync/random.hpp"

namespace spheresync {

namespace {

constexpr double kAntisymmetryTolerance = 1e-12;

double max_column_norm(const Matrix& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.cols(); ++i) best = std::max(best, m.col(i).norm());
  return best;
}

// Adds kappa (y_i - x_i (x_i . y_i)) column by column.
void add_projected(const Matrix& nodes, const Matrix& drive, double kappa, Matrix& out) {
  for (Eigen::Index i = 0; i < nodes.cols(); ++i) {
    const double along = nodes.col(i).dot(drive.col(i));
    out.col(i) += kappa * (drive.col(i) - along * nodes.col(i));
  }
}

}  // namespace

std::string to_string(FrequencyKind kind) {
  switch (kind) {
    case FrequencyKind::none: return "none";
    case FrequencyKind::d2_scalars: return "d2-scalars";
    case FrequencyKind::d3_vectors: return "d3-vectors";
    case FrequencyKind::general_matrix: return "general-matrix";
  }
  return "none";
}

FrequencyKind frequency_kind_from_string(const std::string& name) {
  if (name == "none") return FrequencyKind::none;
  if (name == "d2-scalars") return FrequencyKind::d2_scalars;
  if (name == "d3-vectors") return FrequencyKind::d3_vectors;
  if (name == "general-matrix") return FrequencyKind::general_matrix;
  throw ValidationError(fmt::format("unknown frequency kind '{}'", name));
}

Matrix frequency_matrix_d2(double omega) {
  Matrix m(2, 2);
  m << 0.0, -omega, omega, 0.0;
  return m;
}

Matrix frequency_matrix_d3(const Eigen::Vector3d& w) {
  Matrix m(3, 3);
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

std::vector<Matrix> random_frequencies(FrequencyKind kind, int d, int n, double magnitude,
                                       std::uint64_t seed) {
  std::vector<Matrix> out;
  if (kind == FrequencyKind::none) return out;
  Rng rng(seed);
  out.reserve(static_cast<std::size_t>(n));
  switch (kind) {
    case FrequencyKind::d2_scalars:
      if (d != 2) throw ValidationError("d2-scalars frequencies require d = 2");
      for (int i = 0; i < n; ++i) out.push_back(frequency_matrix_d2(rng.uniform(-magnitude, magnitude)));
      break;
    case FrequencyKind::d3_vectors: {
      if (d != 3) throw ValidationError("d3-vectors frequencies require d = 3");
      const double s = magnitude / std::sqrt(3.0);
      for (int i = 0; i < n; ++i) {
        Eigen::Vector3d w;
        for (int a = 0; a < 3; ++a) w[a] = rng.uniform(-s, s);
        out.push_back(frequency_matrix_d3(w));
      }
      break;
    }
    case FrequencyKind::general_matrix: {
      const double pairs = 0.5 * d * (d - 1);
      const double s = magnitude / std::sqrt(pairs);
      for (int i = 0; i < n; ++i) {
        Matrix m = Matrix::Zero(d, d);
        for (int a = 0; a < d; ++a) {
          for (int b = a + 1; b < d; ++b) {
            m(a, b) = rng.uniform(-s, s);
            m(b, a) = -m(a, b);
          }
        }
        out.push_back(std::move(m));
      }
      break;
    }
    case FrequencyKind::none: break;
  }
  return out;
}

ModelParams ModelParams::homogeneous(int d, int n, double kappa2, double kappa_d) {
  ModelParams p;
  p.d = d;
  p.n = n;
  p.kappa2 = kappa2;
  p.kappa_d = kappa_d;
  return p;
}

void ModelParams::validate() const {
  if (d < 2) throw ValidationError(fmt::format("dimension d = {} must be at least 2", d));
  if (n < d) throw ValidationError(fmt::format("node count N = {} must be at least d = {}", n, d));
  if (!std::isfinite(kappa2) || !std::isfinite(kappa_d)) {
    throw ValidationError("coupling constants must be finite");
  }
  if (frequencies.empty()) return;
  if (static_cast<int>(frequencies.size()) != n) {
    throw ValidationError(fmt::format("expected {} frequency matrices, got {}", n, frequencies.size()));
  }
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    const Matrix& m = frequencies[i];
    if (m.rows() != d || m.cols() != d) {
      throw ValidationError(fmt::format("frequency matrix {} must be {}x{}", i, d, d));
    }
    const double asym = (m + m.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= kAntisymmetryTolerance)) {
      throw ValidationError(fmt::format("frequency matrix {} is not antisymmetric ({:.3e})", i, asym));
    }
  }
}

bool ModelParams::identical_frequencies() const {
  for (std::size_t i = 1; i < frequencies.size(); ++i) {
    if (frequencies[i] != frequencies[0]) return false;
  }
  return true;
}

double ModelParams::max_frequency() const {
  double best = 0.0;
  for (const Matrix& m : frequencies) best = std::max(best, m.norm() / std::numbers::sqrt2);
  return best;
}

double ModelParams::default_dt() const {
  const double scale = std::max({std::abs(kappa2), std::abs(kappa_d), max_frequency(), 1.0});
  return 0.01 / scale;
}

double ModelParams::lyapunov(const Matrix& nodes) const {
  double value = 0.0;
  const double nn = static_cast<double>(nodes.cols());
  if (kappa2 != 0.0) value += kappa2 * potential_pairwise(nodes) / (2.0 * nn);
  if (kappa_d != 0.0) {
    value += kappa_d * potential_dbody(nodes) / (static_cast<double>(d) * std::pow(nn, d - 1));
  }
  return value;
}

DynamicsEngine::DynamicsEngine(ModelParams params) : params_(std::move(params)) {
  params_.validate();
  if (params_.kappa_d != 0.0) kernel_.emplace(params_.d);
}

DriveField DynamicsEngine::dbody_drive(const Matrix& nodes) const {
  if (!kernel_) return DriveField::Zero(nodes.rows(), nodes.cols());
  return kernel_->drive(nodes);
}

DriveField DynamicsEngine::dbody_drive_reference(const Matrix& nodes) const {
  return dbody_drive_naive(nodes);
}

void DynamicsEngine::rhs(const Matrix& nodes, Matrix& out) const {
  if (nodes.rows() != params_.d || nodes.cols() != params_.n) {
    throw ValidationError(fmt::format("state is {}x{}, model expects {}x{}", nodes.rows(), nodes.cols(),
                                      params_.d, params_.n));
  }
  out.setZero(params_.d, params_.n);
  if (!params_.frequencies.empty()) {
    for (int i = 0; i < params_.n; ++i) out.col(i).noalias() = params_.frequencies[i] * nodes.col(i);
  }
  if (params_.kappa2 != 0.0) {
    const Vector mean = nodes.rowwise().mean();
    for (int i = 0; i < params_.n; ++i) {
      const double along = nodes.col(i).dot(mean);
      out.col(i) += params_.kappa2 * (mean - along * nodes.col(i));
    }
  }
  if (kernel_) {
    kernel_->drive(nodes, drive_);
    add_projected(nodes, drive_, params_.kappa_d, out);
  }
}

Matrix DynamicsEngine::rhs(const Matrix& nodes) const {
  Matrix out;
  rhs(nodes, out);
  return out;
}

double DynamicsEngine::step_in_place(Matrix& nodes, double dt, const Matrix* first_stage) const {
  if (!(dt > 0.0)) throw ValidationError(fmt::format("time step must be positive (got {})", dt));
  if (first_stage != nullptr) {
    k1_ = *first_stage;
  } else {
    rhs(nodes, k1_);
  }
  stage_ = nodes + (0.5 * dt) * k1_;
  rhs(stage_, k2_);
  stage_ = nodes + (0.5 * dt) * k2_;
  rhs(stage_, k3_);
  stage_ = nodes + dt * k3_;
  rhs(stage_, k4_);
  nodes += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);

  double correction = 0.0;
  for (Eigen::Index i = 0; i < nodes.cols(); ++i) {
    const double norm = nodes.col(i).norm();
    if (!std::isfinite(norm) || norm == 0.0) {
      throw NumericalError(fmt::format("node {} became non-finite or zero during a step", i));
    }
    correction = std::max(correction, std::abs(norm - 1.0));
    nodes.col(i) /= norm;
  }
  return correction;
}

Matrix rhs(const Configuration& config, const ModelParams& params) {
  return DynamicsEngine(params).rhs(config.nodes());
}

Configuration step(const Configuration& config, const ModelParams& params, double dt) {
  const DynamicsEngine engine(params);
  Matrix nodes = config.nodes();
  engine.step_in_place(nodes, dt);
  return Configuration(std::move(nodes));
}

SimulationResult simulate(const Configuration& initial, const ModelParams& params,
                          const SimulationOptions& options) {
  const DynamicsEngine engine(params);
  if (initial.dimension() != params.d || initial.size() != params.n) {
    throw ValidationError("initial configuration does not match model dimensions");
  }
  const double dt = options.dt > 0.0 ? options.dt : params.default_dt();
  if (!(options.t_max > 0.0)) throw ValidationError("t_max must be positive");
  if (options.sample_stride < 1) throw ValidationError("sample_stride must be at least 1");

  TrajectoryRecord record;
  record.d = params.d;
  record.n = params.n;
  record.dt = dt;
  record.frequencies_identical = params.identical_frequencies();

  Matrix nodes = initial.nodes();
  Matrix velocity;
  const long total_steps = static_cast<long>(std::ceil(options.t_max / dt - 1e-9));

  auto record_sample = [&](long step_index, double speed) {
    const double t = static_cast<double>(step_index) * dt;
    record.times.push_back(t);
    record.order_parameter.push_back(nodes.rowwise().mean().norm());
    record.potential_pair.push_back(potential_pairwise(nodes));
    record.potential_dbody.push_back(params.n >= params.d ? potential_dbody(nodes) : 0.0);
    record.max_speed.push_back(speed);
    record.lyapunov.push_back(params.lyapunov(nodes));
    const std::size_t row = record.times.size() - 1;
    if (options.checkpoint_stride > 0 && row % static_cast<std::size_t>(options.checkpoint_stride) == 0) {
      record.checkpoint_rows.push_back(row);
      record.checkpoints.push_back(nodes);
    }
  };

  long step_index = 0;
  bool last_recorded = false;
  for (;; ++step_index) {
    engine.rhs(nodes, velocity);
    const double speed = max_column_norm(velocity);
    if (!std::isfinite(speed)) throw NumericalError("right-hand side became non-finite");

    if (options.verify_naive && params.kappa_d != 0.0 && options.verify_every > 0 &&
        step_index % options.verify_every == 0) {
      const double dev = relative_field_deviation(engine.dbody_drive(nodes),
                                                  engine.dbody_drive_reference(nodes));
      record.max_naive_deviation = std::max(record.max_naive_deviation, dev);
      ++record.naive_checks;
      if (dev > options.verify_tolerance) {
        throw NumericalError(fmt::format("fast and naive d-body drives disagree at step {} ({:.3e})",
                                         step_index, dev));
      }
    }

    const bool steady = options.stop_when_steady && speed < options.steady_tol;
    const bool done = steady || step_index >= total_steps;
    last_recorded = step_index % options.sample_stride == 0 || done;
    if (last_recorded) record_sample(step_index, speed);
    if (done) {
      record.converged = speed < options.steady_tol;
      break;
    }
    const double correction = engine.step_in_place(nodes, dt, &velocity);
    record.max_renormalization = std::max(record.max_renormalization, correction);
    for (Eigen::Index i = 0; i < nodes.cols(); ++i) {
      record.max_norm_drift = std::max(record.max_norm_drift, std::abs(nodes.col(i).norm() - 1.0));
    }
  }
  record.steps = step_index;
  record.final_time = static_cast<double>(step_index) * dt;
  return SimulationResult{std::move(record), Configuration(std::move(nodes))};
}

MonotonicityReport monotonicity_audit(const TrajectoryRecord& record, double allowed_dip) {
  MonotonicityReport report;
  report.applicable = record.frequencies_identical;
  const auto& f = record.lyapunov;
  if (f.size() >= 2) report.total_increase = f.back() - f.front();
  for (std::size_t k = 1; k < f.size(); ++k) {
    const double dip = f[k - 1] - f[k];
    if (dip > report.largest_dip) {
      report.largest_dip = dip;
      report.worst_index = k;
    }
  }
  report.monotone = report.largest_dip <= allowed_dip;
  return report;
}

}  // namespace spheresync
