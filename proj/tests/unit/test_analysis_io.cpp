#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "spheresync/analysis.hpp"
#include "spheresync/errors.hpp"
#include "spheresync/io.hpp"
#include "spheresync/random.hpp"
#include "spheresync/sweep.hpp"

using namespace spheresync;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

SimulationResult run(const Configuration& x0, const ModelParams& p, double t_max, int checkpoint_stride = 0) {
  SimulationOptions o;
  o.t_max = t_max;
  o.checkpoint_stride = checkpoint_stride;
  return simulate(x0, p, o);
}

Matrix colocated(int d, int n) {
  Matrix m = Matrix::Zero(d, n);
  m.row(0).setOnes();
  return m;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "spheresync_unit";
  fs::create_directories(dir);
  return dir / name;
}

const char* kMinimalRun = R"({"schema": "spheresync.run/1", "model": {"d": 3, "n": 10, "kappa_d": 1.0}})";

}  // namespace

TEST_CASE("order parameter") {
  CHECK(order_parameter(colocated(3, 7)) == doctest::Approx(1.0));
  Matrix pair(2, 2);
  pair << 1, -1, 0, 0;
  CHECK(order_parameter(pair) == 0.0);
  CHECK(order_parameter(Matrix::Identity(4, 4)) == doctest::Approx(0.5));
  const Configuration x = random_unit_configuration(3, 9, 3);
  CHECK(std::abs(order_parameter(x) - x.nodes().rowwise().mean().norm()) < 1e-15);
}

TEST_CASE("trailing band") {
  TrajectoryRecord rec;
  CHECK(trailing_band(rec) == 0.0);
  rec.order_parameter = {0.0, 0.9, 0.1, 0.2, 0.5, 0.4, 0.45, 0.41, 0.43, 0.42};
  CHECK(trailing_band(rec, 0.3) == doctest::Approx(0.02));
  CHECK(trailing_band(rec, 0.1) == 0.0);
  CHECK(trailing_band(rec, 1.0) == doctest::Approx(0.9));
}

TEST_CASE("final-state classification") {
  SUBCASE("ring") {
    const auto p = ModelParams::homogeneous(3, 12, 0.0, 1.0);
    const auto res = run(random_unit_configuration(3, 12, 1), p, 3000.0);
    const SummaryReport s = classify_final(res.record, res.final_state, p);
    CHECK(s.classification == Classification::ring_equispaced);
    CHECK(s.converged);
    REQUIRE(s.spacing.has_value());
    CHECK(s.spacing->closure == Closure::closed);
    REQUIRE(s.r_inf_predicted.has_value());
    CHECK(std::abs(s.r_inf_measured - *s.r_inf_predicted) < 1e-6);

    Matrix rot = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    const SummaryReport rotated = classify_final(res.record, res.final_state.transformed(rot), p);
    CHECK(rotated.classification == s.classification);
    CHECK(std::abs(rotated.r_inf_measured - s.r_inf_measured) < 1e-12);
    Matrix flip = Matrix::Identity(3, 3);
    flip(0, 0) = -1;
    const auto mirrored = ModelParams::homogeneous(3, 12, 0.0, -1.0);
    CHECK(classify_final(res.record, res.final_state.transformed(flip), mirrored).classification ==
          Classification::ring_equispaced);
  }
  SUBCASE("complete above the critical ratio") {
    CHECK(critical_ratio(3, 20) < 0.64);
    const auto p = ModelParams::homogeneous(3, 20, 0.7, 1.0);
    const auto res = run(random_unit_configuration(3, 20, 2), p, 2000.0);
    CHECK(classify_final(res.record, res.final_state, p).classification == Classification::complete);
  }
  SUBCASE("co-located start under d-body coupling") {
    const auto p = ModelParams::homogeneous(3, 6, 0.0, 1.0);
    const auto res = run(Configuration(colocated(3, 6)), p, 10.0);
    CHECK(classify_final(res.record, res.final_state, p).classification == Classification::unstable_start);
  }
  SUBCASE("repulsive planar coupling with spread frequencies") {
    auto p = ModelParams::homogeneous(2, 30, -1.0, 0.0);
    p.frequencies = random_frequencies(FrequencyKind::d2_scalars, 2, 30, 1.0, 5);
    const auto res = run(random_unit_configuration(2, 30, 3), p, 200.0);
    CHECK(classify_final(res.record, res.final_state, p).classification == Classification::asynchronous);
  }
}

TEST_CASE("identity table") {
  const OracleTable t = trig_oracles();
  CHECK(t.all_passed());
  CHECK(t.failures() == 0);
  CHECK(t.worst_residual() < 1e-9);
  CHECK(t.checks.size() > 50);
}

TEST_CASE("run config parsing") {
  const RunConfig c = parse_run_config(kMinimalRun);
  CHECK(c.d == 3);
  CHECK(c.n == 10);
  CHECK(c.kappa2 == 0.0);
  CHECK(c.kappa_d == 1.0);
  CHECK(c.initial.source == InitialSource::random);
  CHECK(c.frequencies.kind == FrequencyKind::none);

  const RunConfig full = parse_run_config(R"({
    "schema": "spheresync.run/1",
    "model": {"d": 2, "n": 8, "kappa2": -1, "kappa_d": 1,
              "frequencies": {"kind": "d2-scalars", "magnitude": 0.5, "seed": 4}},
    "integration": {"dt": 0.005, "t_max": 50, "sample_stride": 20, "checkpoint_stride": 2},
    "initial": {"source": "catalog", "family": "d2_combined", "noise": 0.001, "noise_seed": 3},
    "output": {"summary": "s.json"}})");
  CHECK(full.frequencies.kind == FrequencyKind::d2_scalars);
  CHECK(full.frequencies.seed == 4);
  CHECK(full.simulation.dt == 0.005);
  CHECK(full.simulation.sample_stride == 20);
  CHECK(full.initial.family == Family::d2_combined);
  CHECK(full.output.summary == "s.json");
  CHECK(full.model().frequencies.size() == 8);

  CHECK_THROWS_AS(parse_run_config("{"), ValidationError);
  CHECK_THROWS_AS(parse_run_config(R"({"schema": "spheresync.run/2", "model": {"d": 3, "n": 4}})"), ValidationError);
  CHECK_THROWS_AS(parse_run_config(R"({"schema": "spheresync.run/1", "model": {"d": 3, "n": 4}, "extra": 1})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_run_config(R"({"schema": "spheresync.run/1", "model": {"d": 3, "n": 4, "kapa2": 1}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_run_config(R"({"schema": "spheresync.run/1", "model": {"d": "3", "n": 4}})"), ValidationError);
  CHECK_THROWS_AS(parse_run_config(R"({"schema": "spheresync.run/1"})"), ValidationError);
  CHECK_THROWS_AS(parse_run_config(R"({"schema": "spheresync.run/1", "model": {"d": 4, "n": 3}})"), ValidationError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"schema": "spheresync.run/1", "model": {"d": 3, "n": 4}, "integration": {"dt": -1}})"),
      ValidationError);
  CHECK_THROWS_AS(parse_run_config(
                      R"({"schema": "spheresync.run/1", "model": {"d": 3, "n": 8}, "initial": {"source": "catalog", "family": "d4_torus"}})"),
                  ValidationError);
  CHECK_THROWS_AS(load_run_config(scratch("missing/none.json").string()), IoError);
}

TEST_CASE("initial states") {
  RunConfig c = parse_run_config(kMinimalRun);
  CHECK(make_initial_state(c).nodes() == random_unit_configuration(3, 10, 1).nodes());
  c.initial.source = InitialSource::colocated;
  CHECK(order_parameter(make_initial_state(c)) == doctest::Approx(1.0));
  c.initial.source = InitialSource::catalog;
  c.initial.family = Family::d3_ring;
  CHECK(std::abs(order_parameter(make_initial_state(c)) - 1 / std::sqrt(3.0)) < 1e-12);
  c.initial.noise = 1e-3;
  c.initial.noise_seed = 9;
  const Configuration noisy = make_initial_state(c);
  const Configuration exact = exact_configuration(homogeneous_spec(Family::d3_ring, 10));
  const double dev = (noisy.nodes() - exact.nodes()).cwiseAbs().maxCoeff();
  CHECK(dev > 0.0);
  CHECK(dev < 3e-3);
}

TEST_CASE("state files round trip") {
  const Configuration x = random_unit_configuration(4, 6, 8);
  const Configuration back = parse_state(state_to_json(x));
  CHECK((back.nodes() - x.nodes()).cwiseAbs().maxCoeff() < 1e-15);
  const fs::path path = scratch("state.json");
  save_state(x, path.string());
  CHECK((load_state(path.string()).nodes() - x.nodes()).cwiseAbs().maxCoeff() < 1e-15);
  const auto j = nlohmann::json::parse(state_to_json(x));
  CHECK(j["schema"] == kStateSchema);
  CHECK(j["nodes"].size() == 6);
  CHECK(j["nodes"][0].size() == 4);

  CHECK_THROWS_AS(parse_state(R"({"schema": "spheresync.state/1", "d": 2, "n": 2, "nodes": [[1, 0]]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_state(R"({"schema": "spheresync.state/1", "d": 2, "n": 1, "nodes": [[1, 0, 0]]})"),
                  ValidationError);
  CHECK_THROWS_AS(load_state(scratch("absent.json").string()), IoError);
}

TEST_CASE("trajectory CSV") {
  const auto p = ModelParams::homogeneous(3, 5, 0.0, 1.0);
  SimulationOptions o;
  o.dt = 0.01;
  o.t_max = 0.2;
  o.stop_when_steady = false;
  o.sample_stride = 10;
  const auto res = simulate(random_unit_configuration(3, 5, 6), p, o);
  REQUIRE(res.record.samples() == 3);
  const auto plain = split_lines(trajectory_csv(res.record));
  CHECK(plain.size() == 4);
  CHECK(plain[0] == "t,r,V_pair,V_dbody,max_speed");
  CHECK(std::stod(split_fields(plain[2])[1]) == res.record.order_parameter[1]);

  o.checkpoint_stride = 1;
  const auto with_nodes = simulate(random_unit_configuration(3, 5, 6), p, o);
  const auto lines = split_lines(trajectory_csv(with_nodes.record));
  CHECK(lines.size() == 4);
  CHECK(split_fields(lines[0]).size() == 5 + 15);
  CHECK(split_fields(lines[0])[5] == "x0_0");
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto f = split_fields(lines[k]);
    REQUIRE(f.size() == 20);
    Matrix m(3, 5);
    for (int i = 0; i < 5; ++i)
      for (int a = 0; a < 3; ++a) m(a, i) = std::stod(f[static_cast<std::size_t>(5 + 3 * i + a)]);
    // 17 significant digits round-trip exactly
    CHECK(std::abs(order_parameter(m) - std::stod(f[1])) < 1e-12);
    CHECK(m == with_nodes.record.checkpoints[k - 1]);
  }
}

TEST_CASE("runs are deterministic") {
  const auto p = ModelParams::homogeneous(4, 9, 0.1, 1.0);
  SimulationOptions o;
  o.t_max = 5.0;
  o.checkpoint_stride = 5;
  const auto a = simulate(random_unit_configuration(4, 9, 12), p, o);
  const auto b = simulate(random_unit_configuration(4, 9, 12), p, o);
  CHECK(trajectory_csv(a.record) == trajectory_csv(b.record));
  CHECK(state_to_json(a.final_state) == state_to_json(b.final_state));
  const auto ja = summary_json(classify_final(a.record, a.final_state, p));
  CHECK(ja == summary_json(classify_final(b.record, b.final_state, p)));
}

TEST_CASE("summary JSON") {
  const auto p = ModelParams::homogeneous(3, 8, 0.0, 1.0);
  const Configuration ring = exact_configuration(homogeneous_spec(Family::d3_ring, 8));
  const auto res = run(ring, p, 10.0);
  const auto j = nlohmann::json::parse(summary_json(classify_final(res.record, res.final_state, p)));
  CHECK(j["classification"] == "ring_equispaced");
  CHECK(j["d"] == 3);
  CHECK(j["n"] == 8);
  CHECK(j["spacing"]["closure"] == "closed");
  CHECK(std::abs(j["lambda"]["lambda1"].get<double>() - 16 / std::sqrt(3.0) / std::tan(pi / 8)) < 1e-9);
  CHECK(j["identity_checks"].is_array());
  const fs::path path = scratch("summary.json");
  emit_summary(classify_final(res.record, res.final_state, p), path.string());
  CHECK(nlohmann::json::parse(read_text_file(path.string()))["converged"] == true);
  CHECK_THROWS_AS(write_text_file("/nonexistent_dir/x/y.txt", "a"), IoError);
}

TEST_CASE("sweeps") {
  CHECK(grid(0.4, 0.8, 0.1).size() == 5);
  CHECK(grid(0.4, 0.8, 0.1).back() == doctest::Approx(0.8));
  CHECK(grid(1.0, 1.0, 0.5).size() == 1);
  CHECK_THROWS_AS(grid(0.0, 1.0, 0.0), ValidationError);

  CHECK(sweep_thread_count(3) == 3);
  ::setenv("SPHERESYNC_THREADS", "2", 1);
  CHECK(sweep_thread_count(0) == 2);
  ::setenv("SPHERESYNC_THREADS", "two", 1);
  CHECK_THROWS_AS(sweep_thread_count(0), ValidationError);
  ::unsetenv("SPHERESYNC_THREADS");
  CHECK(sweep_thread_count(0) >= 1);

  SweepRequest req;
  req.d = 3;
  req.n = 12;
  req.kappa2_values = grid(0.0, 0.6, 0.2);
  req.kappa_d_values = {1.0};
  req.simulation.t_max = 2000.0;
  req.seed = 5;
  req.threads = 2;
  const auto points = run_sweep(req);
  REQUIRE(points.size() == 4);
  for (std::size_t k = 1; k < points.size(); ++k) {
    CHECK(points[k].kappa2 > points[k - 1].kappa2);
    CHECK(points[k].summary.r_inf_measured >= points[k - 1].summary.r_inf_measured - 1e-9);
  }
  req.threads = 1;
  CHECK(sweep_csv(run_sweep(req)) == sweep_csv(points));
  CHECK(split_lines(sweep_csv(points)).size() == 5);
}

TEST_CASE("synchronization threshold bracket") {
  SweepRequest req;
  req.d = 2;
  req.n = 30;
  req.frequencies = {FrequencyKind::d2_scalars, 1.0, 5};
  req.simulation.t_max = 200.0;
  req.seed = 3;
  const ThresholdBracket b = bisect_sync_threshold(req, 0.0, -0.05, -5.0, 4);
  REQUIRE(b.bracketed);
  CHECK(b.probes.size() == 6);
  CHECK(b.probes[0].summary.classification == Classification::asynchronous);
  CHECK(std::abs(std::abs(b.synchronized_at - b.asynchronous_at) - 4.95 / 16) < 1e-12);
  CHECK(b.synchronized_at < b.asynchronous_at);
  CHECK_FALSE(bisect_sync_threshold(req, 0.0, -5.0, -0.05, 2).bracketed);
  CHECK_THROWS_AS(bisect_sync_threshold(req, 0.0, 1.0, 1.0), ValidationError);
}
