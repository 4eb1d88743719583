#include "spheresync/io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "spheresync/errors.hpp"
#include "spheresync/random.hpp"

namespace spheresync {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(fmt::format("'{}' must be an object", where));
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) throw ValidationError(fmt::format("unknown key '{}' in '{}'", item.key(), where));
  }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(fmt::format("missing key '{}' in '{}'", key, where));
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(fmt::format("key '{}' in '{}' has the wrong type", key, where));
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return get<T>(obj, key, where);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("malformed JSON: {}", e.what()));
  }
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

InitialSource source_from_string(const std::string& s) {
  if (s == "random") return InitialSource::random;
  if (s == "catalog") return InitialSource::catalog;
  if (s == "colocated") return InitialSource::colocated;
  if (s == "file") return InitialSource::file;
  throw ValidationError(fmt::format("unknown initial source '{}'", s));
}

json lambda_json(const LambdaPair& l) {
  json j{{"lambda1", l.lambda1}, {"lambda2", l.lambda2}, {"residual", l.residual},
         {"absolute_residual", l.absolute_residual}};
  j["consistency"] = l.consistency ? json(*l.consistency) : json(nullptr);
  return j;
}

}  // namespace

void RunConfig::validate() const {
  model().validate();
  if (simulation.dt < 0.0) throw ValidationError("dt must be positive (0 selects the default)");
  if (!(simulation.t_max > 0.0)) throw ValidationError("t_max must be positive");
  if (!(simulation.steady_tol > 0.0)) throw ValidationError("steady_tol must be positive");
  if (simulation.sample_stride < 1) throw ValidationError("sample_stride must be at least 1");
  if (simulation.checkpoint_stride < 0) throw ValidationError("checkpoint_stride must be non-negative");
  if (initial.noise < 0.0) throw ValidationError("noise must be non-negative");
  if (initial.source == InitialSource::catalog) {
    if (!initial.family) throw ValidationError("catalog initial state needs a family");
    const int fd = family_dimension(*initial.family);
    if (fd != 0 && fd != d) {
      throw ValidationError(fmt::format("family {} requires d = {} (run has d = {})", to_string(*initial.family), fd, d));
    }
  }
  if (initial.source == InitialSource::file && initial.path.empty()) {
    throw ValidationError("file initial state needs a path");
  }
}

ModelParams RunConfig::model() const {
  ModelParams p = ModelParams::homogeneous(d, n, kappa2, kappa_d);
  if (d >= 2 && n >= d) {
    p.frequencies = random_frequencies(frequencies.kind, d, n, frequencies.magnitude, frequencies.seed);
  }
  return p;
}

RunConfig parse_run_config(const std::string& text) {
  const json root = parse_json(text);
  reject_unknown(root, {"schema", "model", "integration", "initial", "output"}, "root");
  const auto schema = get<std::string>(root, "schema", "root");
  if (schema != kRunSchema) {
    throw ValidationError(fmt::format("unsupported schema '{}' (expected '{}')", schema, kRunSchema));
  }

  RunConfig c;
  if (!root.contains("model")) throw ValidationError("missing key 'model' in 'root'");
  const json& model = root.at("model");
  reject_unknown(model, {"d", "n", "kappa2", "kappa_d", "frequencies"}, "model");
  c.d = get<int>(model, "d", "model");
  c.n = get<int>(model, "n", "model");
  c.kappa2 = get_or<double>(model, "kappa2", 0.0, "model");
  c.kappa_d = get_or<double>(model, "kappa_d", 0.0, "model");
  if (model.contains("frequencies")) {
    const json& f = model.at("frequencies");
    reject_unknown(f, {"kind", "magnitude", "seed"}, "model.frequencies");
    c.frequencies.kind = frequency_kind_from_string(get<std::string>(f, "kind", "model.frequencies"));
    c.frequencies.magnitude = get_or<double>(f, "magnitude", 1.0, "model.frequencies");
    c.frequencies.seed = get_or<std::uint64_t>(f, "seed", 0, "model.frequencies");
  }

  if (root.contains("integration")) {
    const json& in = root.at("integration");
    reject_unknown(in,
                   {"dt", "t_max", "steady_tol", "stop_when_steady", "sample_stride", "checkpoint_stride",
                    "verify_naive", "verify_every"},
                   "integration");
    auto& s = c.simulation;
    s.dt = get_or<double>(in, "dt", s.dt, "integration");
    s.t_max = get_or<double>(in, "t_max", s.t_max, "integration");
    s.steady_tol = get_or<double>(in, "steady_tol", s.steady_tol, "integration");
    s.stop_when_steady = get_or<bool>(in, "stop_when_steady", s.stop_when_steady, "integration");
    s.sample_stride = get_or<int>(in, "sample_stride", s.sample_stride, "integration");
    s.checkpoint_stride = get_or<int>(in, "checkpoint_stride", s.checkpoint_stride, "integration");
    s.verify_naive = get_or<bool>(in, "verify_naive", s.verify_naive, "integration");
    s.verify_every = get_or<int>(in, "verify_every", s.verify_every, "integration");
  }

  if (root.contains("initial")) {
    const json& in = root.at("initial");
    reject_unknown(in, {"source", "seed", "family", "path", "noise", "noise_seed"}, "initial");
    c.initial.source = source_from_string(get<std::string>(in, "source", "initial"));
    c.initial.seed = get_or<std::uint64_t>(in, "seed", c.initial.seed, "initial");
    if (in.contains("family")) c.initial.family = family_from_string(get<std::string>(in, "family", "initial"));
    c.initial.path = get_or<std::string>(in, "path", "", "initial");
    c.initial.noise = get_or<double>(in, "noise", 0.0, "initial");
    c.initial.noise_seed = get_or<std::uint64_t>(in, "noise_seed", 0, "initial");
  }

  if (root.contains("output")) {
    const json& out = root.at("output");
    reject_unknown(out, {"trajectory", "summary", "final_state"}, "output");
    c.output.trajectory = get_or<std::string>(out, "trajectory", "", "output");
    c.output.summary = get_or<std::string>(out, "summary", "", "output");
    c.output.final_state = get_or<std::string>(out, "final_state", "", "output");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text_file(path)); }

Configuration perturb(const Configuration& config, double amplitude, std::uint64_t seed) {
  if (amplitude == 0.0) return config;
  Rng rng(seed);
  Matrix x = config.nodes();
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index a = 0; a < x.rows(); ++a) x(a, i) += rng.uniform(-amplitude, amplitude);
  }
  return Configuration(std::move(x));
}

Configuration make_initial_state(const RunConfig& c) {
  Configuration base = [&]() -> Configuration {
    switch (c.initial.source) {
      case InitialSource::random:
        return random_unit_configuration(c.d, c.n, c.initial.seed);
      case InitialSource::colocated: {
        Matrix x = Matrix::Zero(c.d, c.n);
        x.row(c.d - 1).setOnes();
        return Configuration(std::move(x));
      }
      case InitialSource::catalog: {
        const Family f = *c.initial.family;
        std::optional<SteadyStateSpec> spec;
        if (c.kappa_d != 0.0) spec = spec_for_couplings(f, c.n, c.kappa2, c.kappa_d);
        if (!spec) spec = homogeneous_spec(f, c.n, c.d);
        return exact_configuration(*spec);
      }
      case InitialSource::file: {
        Configuration s = load_state(c.initial.path);
        if (s.dimension() != c.d || s.size() != c.n) {
          throw ValidationError(fmt::format("state file {} is {}x{}, run expects d = {}, N = {}", c.initial.path,
                                            s.dimension(), s.size(), c.d, c.n));
        }
        return s;
      }
    }
    throw ValidationError("unknown initial source");
  }();
  return perturb(base, c.initial.noise, c.initial.noise_seed);
}

Configuration parse_state(const std::string& text) {
  const json root = parse_json(text);
  reject_unknown(root, {"schema", "d", "n", "nodes"}, "state");
  const auto schema = get<std::string>(root, "schema", "state");
  if (schema != kStateSchema) {
    throw ValidationError(fmt::format("unsupported state schema '{}' (expected '{}')", schema, kStateSchema));
  }
  const int d = get<int>(root, "d", "state");
  const int n = get<int>(root, "n", "state");
  const auto rows = get<std::vector<std::vector<double>>>(root, "nodes", "state");
  if (d < 2 || n < 1 || static_cast<int>(rows.size()) != n) {
    throw ValidationError(fmt::format("state declares N = {} but lists {} nodes", n, rows.size()));
  }
  Matrix x(d, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != d) {
      throw ValidationError(fmt::format("node {} has {} components, expected {}", i, rows[i].size(), d));
    }
    for (int a = 0; a < d; ++a) x(a, i) = rows[i][a];
  }
  return Configuration(std::move(x));
}

Configuration load_state(const std::string& path) { return parse_state(read_text_file(path)); }

std::string state_to_json(const Configuration& config) {
  // Hand-written so every coordinate carries 17 significant digits.
  std::string out = fmt::format("{{\n  \"schema\": \"{}\",\n  \"d\": {},\n  \"n\": {},\n  \"nodes\": [\n", kStateSchema,
                                config.dimension(), config.size());
  for (int i = 0; i < config.size(); ++i) {
    out += "    [";
    for (int a = 0; a < config.dimension(); ++a) {
      out += num(config.nodes()(a, i));
      if (a + 1 < config.dimension()) out += ", ";
    }
    out += (i + 1 < config.size()) ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";
  return out;
}

void save_state(const Configuration& config, const std::string& path) {
  write_text_file(path, state_to_json(config));
}

std::string trajectory_csv(const TrajectoryRecord& record) {
  std::string out = "t,r,V_pair,V_dbody,max_speed";
  const bool with_nodes = !record.checkpoints.empty();
  if (with_nodes) {
    for (int i = 0; i < record.n; ++i) {
      for (int a = 0; a < record.d; ++a) out += fmt::format(",x{}_{}", i, a);
    }
  }
  out += '\n';
  std::size_t next = 0;
  for (std::size_t k = 0; k < record.samples(); ++k) {
    out += fmt::format("{},{},{},{},{}", num(record.times[k]), num(record.order_parameter[k]),
                       num(record.potential_pair[k]), num(record.potential_dbody[k]), num(record.max_speed[k]));
    if (with_nodes) {
      const bool here = next < record.checkpoint_rows.size() && record.checkpoint_rows[next] == k;
      for (int i = 0; i < record.n; ++i) {
        for (int a = 0; a < record.d; ++a) {
          out += ',';
          if (here) out += num(record.checkpoints[next](a, i));
        }
      }
      if (here) ++next;
    }
    out += '\n';
  }
  return out;
}

void emit_trajectory(const TrajectoryRecord& record, const std::string& path) {
  write_text_file(path, trajectory_csv(record));
}

std::string summary_json(const SummaryReport& r) {
  json j;
  j["classification"] = to_string(r.classification);
  j["d"] = r.d;
  j["n"] = r.n;
  j["kappa2"] = r.kappa2;
  j["kappa_d"] = r.kappa_d;
  j["converged"] = r.converged;
  j["final_time"] = r.final_time;
  j["r_inf_measured"] = r.r_inf_measured;
  j["r_band"] = r.r_band;
  j["band_definition"] = r.band_definition;
  if (r.spacing) {
    j["spacing"] = {{"median", r.spacing->median},
                    {"max_deviation", r.spacing->max_deviation},
                    {"equispaced", r.spacing->equispaced},
                    {"closure", to_string(r.spacing->closure)}};
  } else {
    j["spacing"] = nullptr;
  }
  j["lambda"] = r.lambda ? lambda_json(*r.lambda) : json(nullptr);
  j["r_inf_predicted"] = r.r_inf_predicted ? json(*r.r_inf_predicted) : json(nullptr);
  j["predicted_family"] = r.predicted_family;
  if (r.d4_fit) {
    const auto& f = *r.d4_fit;
    j["fitted_parameters"] = {{"alpha", f.alpha},         {"beta", f.beta},
                              {"theta", f.theta},         {"rms_residual", f.rms_residual},
                              {"r_inf_predicted", f.r_inf_predicted}, {"converged", f.converged},
                              {"degenerate", f.degenerate}, {"diagnostics", f.diagnostics}};
  } else if (r.d2_alpha_measured) {
    j["fitted_parameters"] = {{"alpha", *r.d2_alpha_measured}};
  } else {
    j["fitted_parameters"] = nullptr;
  }
  json checks = json::array();
  for (const auto& c : r.identity_checks) {
    checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}});
  }
  j["identity_checks"] = checks;
  return j.dump(2) + "\n";
}

void emit_summary(const SummaryReport& report, const std::string& path) {
  write_text_file(path, summary_json(report));
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(path, "cannot open for writing");
  f << text;
  f.flush();
  if (!f) throw IoError(path, "write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError(path, "read failed");
  return ss.str();
}

}  // namespace spheresync
