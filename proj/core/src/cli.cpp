#include "spheresync/cli.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "spheresync/analysis.hpp"
#include "spheresync/errors.hpp"
#include "spheresync/io.hpp"
#include "spheresync/reduced_flow.hpp"
#include "spheresync/steady_states.hpp"
#include "spheresync/sweep.hpp"

namespace spheresync {

namespace {

struct SimulateArgs {
  std::string config;
};

struct SweepArgs {
  int d = 3;
  int n = 40;
  double kappa_d = 1.0;
  double from = 0.0;
  double to = 0.8;
  double step = 0.05;
  double dt = 0.0;
  double t_max = 400.0;
  double steady_tol = 1e-9;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string freq_kind = "none";
  double freq_magnitude = 1.0;
  std::uint64_t freq_seed = 0;
  std::string out;
};

struct ReduceArgs {
  double c1 = -0.75;
  double c2 = 1.0 / 3.0;
  double u0 = 0.5;
  int sign = -1;
  std::string state;
  double dt = 1e-3;
  double t_max = 10.0;
  std::string out;
};

struct StateArgs {
  std::string state;
  std::string out;
  bool canonical = false;
};

struct CatalogArgs {
  std::string family;
  int n = 0;
  int d = 0;
  double kappa2 = 0.0;
  double kappa_d = 1.0;
  std::string out;
};

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  const RunConfig config = load_run_config(a.config);
  const ModelParams params = config.model();
  const Configuration initial = make_initial_state(config);
  const SimulationResult run = simulate(initial, params, config.simulation);
  const SummaryReport summary = classify_final(run.record, run.final_state, params);
  if (!config.output.trajectory.empty()) emit_trajectory(run.record, config.output.trajectory);
  if (!config.output.summary.empty()) emit_summary(summary, config.output.summary);
  if (!config.output.final_state.empty()) save_state(run.final_state, config.output.final_state);
  fmt::print(out, "classification={} r_inf={:.12g} t={:.6g} converged={}\n", to_string(summary.classification),
             summary.r_inf_measured, summary.final_time, summary.converged);
  return kExitOk;
}

int run_sweep_command(const SweepArgs& a, std::ostream& out) {
  SweepRequest req;
  req.d = a.d;
  req.n = a.n;
  req.kappa2_values = grid(a.from, a.to, a.step);
  req.kappa_d_values = {a.kappa_d};
  req.frequencies.kind = frequency_kind_from_string(a.freq_kind);
  req.frequencies.magnitude = a.freq_magnitude;
  req.frequencies.seed = a.freq_seed;
  req.simulation.dt = a.dt;
  req.simulation.t_max = a.t_max;
  req.simulation.steady_tol = a.steady_tol;
  req.seed = a.seed;
  req.threads = a.threads;
  emit(out, a.out, sweep_csv(run_sweep(req)));
  return kExitOk;
}

struct VerifyLine {
  std::string name;
  double value;
  double tolerance;
};

std::vector<VerifyLine> verification_checks() {
  std::vector<VerifyLine> lines;
  struct Case {
    Family family;
    int n;
    double kappa2;
    double kappa_d;
  };
  const double d5_ratio = 0.5 * critical_ratio(5, 12);
  const std::vector<Case> cases = {
      {Family::d2_splay, 40, 0.0, 1.0},     {Family::d2_splay, 40, 0.0, -1.0},
      {Family::d2_combined, 40, -1.0, 1.0}, {Family::d2_combined, 40, 0.7, -0.4},
      {Family::d3_ring, 40, 0.0, 1.0},      {Family::d3_ring, 17, 0.0, -2.0},
      {Family::d3_combined, 40, 1.0, 2.0},  {Family::d3_combined, 40, -0.5, -1.0},
      {Family::d4_torus, 12, 0.0, 1.0},     {Family::d4_torus, 9, 0.0, -1.0},
      {Family::d5_ring, 12, 0.0, 1.0},      {Family::d5_combined, 12, d5_ratio, 1.0},
      {Family::d5_combined, 12, -0.5 * d5_ratio, -1.0}, {Family::basis_Nd, 5, 0.0, 1.0},
  };
  for (const auto& c : cases) {
    const auto spec = spec_for_couplings(c.family, c.n, c.kappa2, c.kappa_d);
    const std::string tag = fmt::format("{} N={} kappa2={} kappaD={}", to_string(c.family), c.n, c.kappa2, c.kappa_d);
    if (!spec) {
      lines.push_back({"catalog exists: " + tag, 1.0, 0.0});
      continue;
    }
    const Configuration x = exact_configuration(*spec);
    ModelParams p = ModelParams::homogeneous(spec->d, c.n, c.kappa2, c.kappa_d);
    const Matrix v = rhs(x, p);
    double speed = 0.0;
    for (Eigen::Index i = 0; i < v.cols(); ++i) speed = std::max(speed, v.col(i).norm());
    lines.push_back({"rhs vanishes: " + tag, speed, 1e-10});
    const Matrix g = x.nodes().transpose() * x.nodes();
    lines.push_back({"gram closed form: " + tag, (g - closed_form_gram(*spec)).cwiseAbs().maxCoeff(), 1e-12});
    const LambdaPair fit = verify_lambda_relation(x, c.kappa2, c.kappa_d);
    const LambdaPair want = catalog_lambdas(*spec);
    lines.push_back({"lambda residual: " + tag, fit.residual, 1e-8});
    const double scale = std::max({1.0, std::abs(want.lambda1), std::abs(want.lambda2)});
    lines.push_back({"lambda closed form: " + tag,
                     std::max(std::abs(fit.lambda1 - want.lambda1), std::abs(fit.lambda2 - want.lambda2)) / scale,
                     1e-8});
    lines.push_back({"lambda2 consistency: " + tag, fit.consistency.value_or(0.0), 1e-8});
  }
  for (int d = 2; d <= 5; ++d) {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const int n = d + (trial % (13 - d));
      const Configuration x = random_unit_configuration(d, n, 1000 + 17 * d + trial);
      worst = std::max(worst, relative_field_deviation(dbody_drive_fast(x), dbody_drive_naive(x)));
    }
    lines.push_back({fmt::format("fast vs naive kernel: d={}", d), worst, 1e-10});
  }
  const OracleTable oracles = trig_oracles();
  lines.push_back({fmt::format("trigonometric oracles ({} sums)", oracles.checks.size()), oracles.worst_residual(),
                   oracles.tolerance});
  return lines;
}

int run_verify(std::ostream& out) {
  int failures = 0;
  for (const auto& line : verification_checks()) {
    const bool ok = line.value <= line.tolerance;
    if (!ok) ++failures;
    fmt::print(out, "{} {} (value {:.3e}, tolerance {:.1e})\n", ok ? "ok  " : "FAIL", line.name, line.value,
               line.tolerance);
  }
  fmt::print(out, "{}\n", failures == 0 ? "all checks passed" : fmt::format("{} checks failed", failures));
  return failures == 0 ? kExitOk : kExitValidation;
}

int run_reduce(const ReduceArgs& a, std::ostream& out) {
  Configuration triple = [&] {
    if (!a.state.empty()) return load_state(a.state);
    ReducedState s;
    s.c1 = a.c1;
    s.c2 = a.c2;
    s.u = a.u0;
    const double p = cubic_p(a.u0, a.c1, a.c2);
    if (p < 0.0) throw ValidationError(fmt::format("p(u0) = {} < 0: no real triple product", p));
    s.x123 = (a.sign < 0 ? -1.0 : 1.0) * std::sqrt(p);
    return triple_from_invariants(s);
  }();
  const auto relabelled = relabel_for_reduction(triple);
  if (!relabelled) {
    fmt::print(out, "all pair products vanish: the triple is already synchronized\n");
    return kExitOk;
  }
  const ReducedComparison cmp = compare_with_full(*relabelled, a.dt, a.t_max);
  const CubicRoots roots = cubic_roots(cmp.initial.c1, cmp.initial.c2);
  std::string csv = "t,u_reduced,x123_reduced,u_full,x123_full\n";
  for (std::size_t k = 0; k < cmp.reduced.times.size(); ++k) {
    csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", cmp.reduced.times[k], cmp.reduced.u[k],
                       cmp.reduced.x123[k], cmp.u_full[k], cmp.x123_full[k]);
  }
  if (!a.out.empty()) write_text_file(a.out, csv);
  fmt::print(out, "c1={:.12g} c2={:.12g} u0={:.12g} x123_0={:.12g}\n", cmp.initial.c1, cmp.initial.c2, cmp.initial.u,
             cmp.initial.x123);
  fmt::print(out, "roots r-={:.12g} r+={:.12g} r3={}\n", roots.r_minus, roots.r_plus,
             roots.r3 ? fmt::format("{:.12g}", *roots.r3) : std::string("none"));
  fmt::print(out, "max |u_full-u_red|={:.3e} max |x123_full-x123_red|={:.3e} final |G-I|={:.3e} lambda={:.12g}\n",
             cmp.max_u_deviation, cmp.max_x123_deviation, cmp.final_gram_deviation, cmp.final_lambda);
  if (a.out.empty()) out << csv;
  return kExitOk;
}

int run_align(const StateArgs& a, std::ostream& out) {
  const Configuration x = load_state(a.state);
  const Alignment al = a.canonical ? canonical_orientation(x) : align_to_axis(x);
  emit(out, a.out, state_to_json(al.rotated));
  return kExitOk;
}

int run_hopf(const StateArgs& a, std::ostream& out) {
  const Configuration x = load_state(a.state);
  if (x.dimension() != 4) throw ValidationError("hopf needs a d = 4 state");
  std::string csv = "i,h1,h2,h3\n";
  for (int i = 0; i < x.size(); ++i) {
    const UnitVector h = hopf_map(UnitVector(x.node(i)));
    csv += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i, h[0], h[1], h[2]);
  }
  emit(out, a.out, csv);
  return kExitOk;
}

int run_catalog(const CatalogArgs& a, std::ostream& out) {
  const Family f = family_from_string(a.family);
  std::optional<SteadyStateSpec> spec;
  if (f == Family::basis_Nd) {
    spec = homogeneous_spec(f, a.n, a.d > 0 ? a.d : a.n);
  } else {
    spec = spec_for_couplings(f, a.n, a.kappa2, a.kappa_d);
  }
  if (!spec) throw ValidationError("no steady state of this family exists for these couplings");
  emit(out, a.out, state_to_json(exact_configuration(*spec)));
  return kExitOk;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synchronization on spheres with pairwise and d-body coupling", "spheresync"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run one configuration file");
  simulate_cmd->add_option("config", sim.config, "Run configuration (JSON)")->required();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid over kappa2 at fixed kappaD; CSV of final states");
  sweep_cmd->add_option("--d", sw.d, "Dimension")->capture_default_str();
  sweep_cmd->add_option("--n", sw.n, "Node count")->capture_default_str();
  sweep_cmd->add_option("--kappa-d", sw.kappa_d, "d-body coupling")->capture_default_str();
  sweep_cmd->add_option("--kappa2-from", sw.from, "First kappa2")->capture_default_str();
  sweep_cmd->add_option("--kappa2-to", sw.to, "Last kappa2")->capture_default_str();
  sweep_cmd->add_option("--kappa2-step", sw.step, "kappa2 step")->capture_default_str();
  sweep_cmd->add_option("--dt", sw.dt, "Time step (0: default)")->capture_default_str();
  sweep_cmd->add_option("--t-max", sw.t_max, "Integration horizon")->capture_default_str();
  sweep_cmd->add_option("--steady-tol", sw.steady_tol, "Steady-state speed tolerance")->capture_default_str();
  sweep_cmd->add_option("--seed", sw.seed, "Initial-state seed")->capture_default_str();
  sweep_cmd->add_option("--threads", sw.threads, "Worker threads (0: SPHERESYNC_THREADS or all cores)");
  sweep_cmd->add_option("--freq-kind", sw.freq_kind, "none | d2-scalars | d3-vectors | general-matrix");
  sweep_cmd->add_option("--freq-magnitude", sw.freq_magnitude, "Frequency magnitude");
  sweep_cmd->add_option("--freq-seed", sw.freq_seed, "Frequency seed");
  sweep_cmd->add_option("--out", sw.out, "CSV output path (default stdout)");

  auto* verify_cmd = app.add_subcommand("verify", "Catalog, lambda, kernel and identity self-checks");

  ReduceArgs rd;
  auto* reduce_cmd = app.add_subcommand("reduce-n3", "Three-node reduction against the full flow");
  reduce_cmd->add_option("--c1", rd.c1, "x23/x12")->capture_default_str();
  reduce_cmd->add_option("--c2", rd.c2, "x13/x12")->capture_default_str();
  reduce_cmd->add_option("--u0", rd.u0, "Initial x12")->capture_default_str();
  reduce_cmd->add_option("--sign", rd.sign, "Sign of the initial triple product")->capture_default_str();
  reduce_cmd->add_option("--state", rd.state, "Start from a three-node state file instead");
  reduce_cmd->add_option("--dt", rd.dt, "Time step")->capture_default_str();
  reduce_cmd->add_option("--t-max", rd.t_max, "Integration horizon")->capture_default_str();
  reduce_cmd->add_option("--out", rd.out, "CSV output path (default stdout)");

  StateArgs al;
  auto* align_cmd = app.add_subcommand("align", "Rotate X_av onto the last axis");
  align_cmd->add_option("state", al.state, "State file")->required();
  align_cmd->add_flag("--canonical", al.canonical, "Also fix the residual rotation about the axis");
  align_cmd->add_option("--out", al.out, "Output state path (default stdout)");

  StateArgs hp;
  auto* hopf_cmd = app.add_subcommand("hopf", "Hopf projection of a d = 4 state");
  hopf_cmd->add_option("state", hp.state, "State file")->required();
  hopf_cmd->add_option("--out", hp.out, "CSV output path (default stdout)");

  CatalogArgs cat;
  auto* catalog_cmd = app.add_subcommand("catalog", "Write an exact steady state");
  catalog_cmd->add_option("--family", cat.family, "Family name")->required();
  catalog_cmd->add_option("--n", cat.n, "Node count")->required();
  catalog_cmd->add_option("--d", cat.d, "Dimension (basis_Nd only)");
  catalog_cmd->add_option("--kappa2", cat.kappa2, "Pairwise coupling")->capture_default_str();
  catalog_cmd->add_option("--kappa-d", cat.kappa_d, "d-body coupling")->capture_default_str();
  catalog_cmd->add_option("--out", cat.out, "Output state path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*simulate_cmd) return run_simulate(sim, out);
    if (*sweep_cmd) return run_sweep_command(sw, out);
    if (*verify_cmd) return run_verify(out);
    if (*reduce_cmd) return run_reduce(rd, out);
    if (*align_cmd) return run_align(al, out);
    if (*hopf_cmd) return run_hopf(hp, out);
    if (*catalog_cmd) return run_catalog(cat, out);
  } catch (const IoError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitIo;
  } catch (const ValidationError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitValidation;
  } catch (const NumericalError& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kExitValidation;
  }
  err << app.help();
  return kExitValidation;
}

int cli_dispatch(int argc, const char* const* argv) { return cli_dispatch(argc, argv, std::cout, std::cerr); }

}  // namespace spheresync
