// Command-line front end: solve, sweep, classify, rate.

#include "nashdyn/bench.hpp"
#include "nashdyn/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>

namespace {

using namespace nashdyn;
using namespace nashdyn::bench;
using json = nlohmann::json;

constexpr int kConfigExit = 2;
constexpr int kNumericExit = 3;

json spectrum_json(const Eigen::VectorXcd& s) {
  json out = json::array();
  for (Index i = 0; i < s.size(); ++i) out.push_back({s[i].real(), s[i].imag()});
  return out;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(); }

int cmd_solve(const std::string& path, const std::string& algo,
              const std::string& x0, const std::string& out_dir) {
  ExperimentConfig cfg = load_config(path);
  if (!algo.empty()) {
    if (algo == kConstrainedAlgorithm && !cfg.constraint) {
      throw ConfigError("--algo " + algo + " needs a constraint in the config");
    }
    if (algo != kConstrainedAlgorithm) parse_algorithm(algo);
    cfg.algorithms = {algo};
    cfg.reference.clear();
  }
  if (!x0.empty()) {
    cfg.init.mode = InitSpec::Mode::Fixed;
    cfg.init.z0 = parse_vector_list(x0);
    const Index d = make_builtin(cfg.problem).dims.total();
    if (cfg.init.z0.size() != d) {
      throw ConfigError("--x0: expected " + std::to_string(d) + " entries");
    }
  }
  cfg.init.count = 1;
  if (!out_dir.empty()) {
    cfg.output.trace_dir = out_dir;
    cfg.output.summary_path = out_dir + "/summary.json";
    cfg.output.plot_data_path = out_dir + "/plot_data.csv";
  }
  return execute_experiment(cfg, std::cout);
}

int cmd_sweep(const std::string& path, int count, long long seed) {
  ExperimentConfig cfg = load_config(path);
  if (count > 0) {
    if (cfg.init.mode == InitSpec::Mode::Fixed) {
      throw ConfigError("--count needs init.mode = uniform_box");
    }
    cfg.init.count = count;
  }
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  return execute_experiment(cfg, std::cout);
}

int cmd_classify(const std::string& path, const std::string& point) {
  const ExperimentConfig cfg = load_config(path);
  const GameOracle game = make_builtin(cfg.problem);
  const Vector p = parse_vector_list(point);
  if (p.size() != game.dims.total()) {
    throw ConfigError("--point: expected " + std::to_string(game.dims.total()) +
                      " entries");
  }
  const JointPoint z(p, game.dims);
  json out;
  std::optional<FixedPointReport> report;
  if (cfg.constraint) {
    const Location loc = locate(*cfg.constraint, p);
    out["location"] = to_string(loc);
    if (loc != Location::Interior || cfg.constraint->has_empty_interior()) {
      if (loc == Location::Exterior) throw ConfigError("--point lies outside the constraint");
      report = check_boundary_gne(game, *cfg.constraint, z, cfg.classify.tol);
    }
  }
  if (!report) {
    report = classify_unconstrained(game, z, cfg.classify.tol,
                                    cfg.classify.margin, cfg.solver);
  }
  out["verdict"] = to_string(report->verdict);
  out["omega_norm"] = report->omega_norm;
  out["lambda_x"] = report->lambda_x;
  out["lambda_y"] = report->lambda_y;
  out["dnd_map_radius"] = nullable(report->dnd_map_radius);
  out["gda_jac_spectrum"] = spectrum_json(report->gda_jac_spectrum);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_rate(const std::string& trace_path, const std::string& zstar, int tail) {
  const IterateTrace trace = read_trace_csv(trace_path);
  const Vector z = parse_vector_list(zstar);
  if (z.size() != trace.dims.total()) {
    throw ConfigError("--zstar: expected " + std::to_string(trace.dims.total()) +
                      " entries");
  }
  RateOptions options;
  options.tail_len = tail;
  const RateEstimate r = estimate_rate(trace, JointPoint(z, trace.dims), options);
  json out = {{"order", to_string(r.order)},
              {"factor", r.factor},
              {"slope", nullable(r.slope)},
              {"tail_len", r.tail_len},
              {"status", to_string(trace.status)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local Nash equilibrium solvers for smooth zero-sum games"};
  app.require_subcommand(1);

  std::string config, algo, x0, out_dir, point, trace_path, zstar;
  int count = 0;
  long long seed = -1;
  int tail = 20;

  auto* solve = app.add_subcommand("solve", "Run the configured algorithms from one start");
  solve->add_option("--config", config, "JSON experiment config")->required();
  solve->add_option("--algo", algo, "Run only this algorithm");
  solve->add_option("--x0", x0, "Initial point v1,v2,...");
  solve->add_option("--out", out_dir, "Directory for traces, summary and plot data");

  auto* sw = app.add_subcommand("sweep", "Random-initialization sweep");
  sw->add_option("--config", config, "JSON experiment config")->required();
  sw->add_option("--count", count, "Number of initial points");
  sw->add_option("--seed", seed, "Sweep seed");

  auto* cl = app.add_subcommand("classify", "Classify a candidate point");
  cl->add_option("--config", config, "JSON experiment config")->required();
  cl->add_option("--point", point, "Point v1,v2,...")->required();

  auto* rate = app.add_subcommand("rate", "Estimate the convergence rate of a trace");
  rate->add_option("--trace", trace_path, "Trace CSV")->required();
  rate->add_option("--zstar", zstar, "Limit point v1,v2,...")->required();
  rate->add_option("--tail", tail, "Tail length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*solve) return cmd_solve(config, algo, x0, out_dir);
    if (*sw) return cmd_sweep(config, count, seed);
    if (*cl) return cmd_classify(config, point);
    if (*rate) return cmd_rate(trace_path, zstar, tail);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::runtime_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumericExit;
  }
  return kConfigExit;
}
