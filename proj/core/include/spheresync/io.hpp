#pragma once

// Run configuration, state files and result emitters.
//
// Run configs are JSON documents tagged "schema": "spheresync.run/1";
// unknown keys at any level are rejected. State files hold one node per
// row under "nodes" and are tagged "spheresync.state/1".

#include <cstdint>
#include <optional>
#include <string>

#include "spheresync/analysis.hpp"
#include "spheresync/dynamics.hpp"

namespace spheresync {

inline constexpr const char* kRunSchema = "spheresync.run/1";
inline constexpr const char* kStateSchema = "spheresync.state/1";

struct FrequencySpec {
  FrequencyKind kind = FrequencyKind::none;
  double magnitude = 1.0;
  std::uint64_t seed = 0;
};

enum class InitialSource { random, catalog, colocated, file };

struct InitialSpec {
  InitialSource source = InitialSource::random;
  std::uint64_t seed = 1;
  /// catalog: family member for the run's couplings (falls back to the
  /// homogeneous member when the couplings admit none).
  std::optional<Family> family;
  std::string path;
  /// Uniform per-component perturbation U(-noise, noise) before renormalizing.
  double noise = 0.0;
  std::uint64_t noise_seed = 0;
};

struct OutputSpec {
  std::string trajectory;
  std::string summary;
  std::string final_state;
};

struct RunConfig {
  int d = 3;
  int n = 3;
  double kappa2 = 0.0;
  double kappa_d = 0.0;
  FrequencySpec frequencies;
  SimulationOptions simulation;
  InitialSpec initial;
  OutputSpec output;

  /// Throws ValidationError (dt, t_max > 0 once resolved, N >= d, family
  /// dimension matches d).
  void validate() const;
  ModelParams model() const;
};

/// Parses a run config document. Malformed JSON, missing required keys,
/// wrong types or unknown keys throw ValidationError.
RunConfig parse_run_config(const std::string& json_text);
/// Reads and parses; unreadable files throw IoError.
RunConfig load_run_config(const std::string& path);

/// Builds the initial configuration described by the spec.
Configuration make_initial_state(const RunConfig& config);

/// Applies U(-amplitude, amplitude) noise to every coordinate and renormalizes.
Configuration perturb(const Configuration& config, double amplitude, std::uint64_t seed);

Configuration parse_state(const std::string& json_text);
Configuration load_state(const std::string& path);
std::string state_to_json(const Configuration& config);
void save_state(const Configuration& config, const std::string& path);

/// CSV with header t,r,V_pair,V_dbody,max_speed; when checkpoints exist,
/// columns x<i>_<a> follow and are filled on checkpoint rows only.
/// Numbers are written with 17 significant digits.
std::string trajectory_csv(const TrajectoryRecord& record);
void emit_trajectory(const TrajectoryRecord& record, const std::string& path);

std::string summary_json(const SummaryReport& report);
void emit_summary(const SummaryReport& report, const std::string& path);

/// Writes `text` to `path`, throwing IoError with the path on failure.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace spheresync
