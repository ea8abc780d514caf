#include "nashdyn/bench.hpp"

#include "nashdyn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace nashdyn::bench {

namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------- JSON input

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) {
    throw ConfigError((where.empty() ? "document" : where) +
                      ": expected an object");
  }
  for (const auto& item : obj.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError(join(where, item.key()) + ": unknown key");
  }
}

double number_at(const json& value, const std::string& path) {
  if (!value.is_number()) throw ConfigError(path + ": expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + ": must be finite");
  return v;
}

void read(const json& obj, const char* key, const std::string& where, double& out) {
  if (obj.contains(key)) out = number_at(obj.at(key), join(where, key));
}

void read(const json& obj, const char* key, const std::string& where, int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError(join(where, key) + ": expected an integer");
  }
  out = v.get<int>();
}

void read(const json& obj, const char* key, const std::string& where, bool& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(join(where, key) + ": expected true/false");
  out = v.get<bool>();
}

void read(const json& obj, const char* key, const std::string& where,
          std::string& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(where, key) + ": expected a string");
  out = v.get<std::string>();
}

Vector vector_at(const json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) {
    throw ConfigError(path + ": expected a nonempty number array");
  }
  Vector v(static_cast<Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    v[static_cast<Index>(i)] =
        number_at(value[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

/// Row-major nested array; a flat array is read as a single row.
Matrix matrix_at(const json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) {
    throw ConfigError(path + ": expected a nonempty array of rows");
  }
  if (!value.front().is_array()) {
    const Vector row = vector_at(value, path);
    return row.transpose();
  }
  const std::size_t cols = value.front().size();
  Matrix M(static_cast<Index>(value.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!value[i].is_array() || value[i].size() != cols) {
      throw ConfigError(row_path + ": rows must have equal length");
    }
    M.row(static_cast<Index>(i)) = vector_at(value[i], row_path).transpose();
  }
  return M;
}

ProblemSpec parse_problem(const json& obj) {
  const std::string where = "problem";
  check_keys(obj, {"kind", "A", "P", "Q", "B", "sign"}, where);
  if (!obj.contains("kind")) throw ConfigError("problem.kind: missing");
  ProblemSpec spec;
  std::string kind;
  read(obj, "kind", where, kind);
  try {
    spec.kind = parse_problem_kind(kind);
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("problem.kind: ") + e.what());
  }
  if (obj.contains("A")) spec.A = matrix_at(obj.at("A"), "problem.A");
  if (obj.contains("P")) spec.P = matrix_at(obj.at("P"), "problem.P");
  if (obj.contains("Q")) spec.Q = matrix_at(obj.at("Q"), "problem.Q");
  if (obj.contains("B")) spec.B = matrix_at(obj.at("B"), "problem.B");
  read(obj, "sign", where, spec.sign);
  return spec;
}

ConvexSet parse_set(const json& obj, const std::string& where) {
  if (!obj.is_object() || !obj.contains("kind") || !obj.at("kind").is_string()) {
    throw ConfigError(join(where, "kind") + ": missing");
  }
  const std::string kind = obj.at("kind").get<std::string>();
  auto require = [&](const char* key) -> const json& {
    if (!obj.contains(key)) throw ConfigError(join(where, key) + ": missing");
    return obj.at(key);
  };
  double tol = 1e-9;
  auto finish = [&](ConvexSet set) {
    read(obj, "boundary_tol", where, tol);
    return set.with_boundary_tol(tol);
  };
  try {
    if (kind == "box") {
      check_keys(obj, {"kind", "lo", "hi", "boundary_tol"}, where);
      return finish(ConvexSet::box(vector_at(require("lo"), join(where, "lo")),
                                   vector_at(require("hi"), join(where, "hi"))));
    }
    if (kind == "ball") {
      check_keys(obj, {"kind", "center", "radius", "boundary_tol"}, where);
      return finish(ConvexSet::ball(
          vector_at(require("center"), join(where, "center")),
          number_at(require("radius"), join(where, "radius"))));
    }
    if (kind == "halfspace") {
      check_keys(obj, {"kind", "a", "b", "boundary_tol"}, where);
      return finish(
          ConvexSet::halfspace(vector_at(require("a"), join(where, "a")),
                               number_at(require("b"), join(where, "b"))));
    }
    if (kind == "simplex") {
      check_keys(obj, {"kind", "dim", "boundary_tol"}, where);
      const json& d = require("dim");
      if (!d.is_number_integer()) {
        throw ConfigError(join(where, "dim") + ": expected an integer");
      }
      return finish(ConvexSet::simplex(d.get<Index>()));
    }
    if (kind == "product" || kind == "intersection") {
      const char* list_key = kind == "product" ? "factors" : "parts";
      check_keys(obj, {"kind", list_key, "boundary_tol"}, where);
      const json& list = require(list_key);
      if (!list.is_array() || list.empty()) {
        throw ConfigError(join(where, list_key) + ": expected a nonempty array");
      }
      std::vector<ConvexSet> sets;
      for (std::size_t i = 0; i < list.size(); ++i) {
        sets.push_back(parse_set(
            list[i], join(where, list_key) + "[" + std::to_string(i) + "]"));
      }
      return finish(kind == "product" ? ConvexSet::product(std::move(sets))
                                      : ConvexSet::intersection(std::move(sets)));
    }
  } catch (const ArgumentError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(join(where, "kind") + ": unknown set kind '" + kind + "'");
}

SolverConfig parse_solver(const json& obj) {
  const std::string w = "solver";
  check_keys(obj,
             {"alpha", "tol", "max_iters", "epsilon_switch", "armijo_c",
              "armijo_shrink", "armijo_max_backtracks", "diverge_norm",
              "gn_damping", "gn_line_search", "gn_only", "nash_margin", "reg",
              "lss", "cesp", "perturb"},
             w);
  SolverConfig c;
  read(obj, "alpha", w, c.alpha);
  read(obj, "tol", w, c.tol);
  read(obj, "max_iters", w, c.max_iters);
  read(obj, "epsilon_switch", w, c.epsilon_switch);
  read(obj, "armijo_c", w, c.armijo_c);
  read(obj, "armijo_shrink", w, c.armijo_shrink);
  read(obj, "armijo_max_backtracks", w, c.armijo_max_backtracks);
  read(obj, "diverge_norm", w, c.diverge_norm);
  read(obj, "gn_damping", w, c.gn_damping);
  read(obj, "gn_line_search", w, c.gn_line_search);
  read(obj, "gn_only", w, c.gn_only);
  read(obj, "nash_margin", w, c.nash_margin);
  if (obj.contains("reg")) {
    const json& r = obj.at("reg");
    const std::string rw = "solver.reg";
    check_keys(r, {"b_x", "b_y", "lambda0", "delta0", "beta_literal_sign",
                   "literal_gershgorin"},
               rw);
    read(r, "b_x", rw, c.reg.b_x);
    read(r, "b_y", rw, c.reg.b_y);
    read(r, "lambda0", rw, c.reg.lambda0);
    read(r, "delta0", rw, c.reg.delta0);
    read(r, "beta_literal_sign", rw, c.reg.beta_literal_sign);
    read(r, "literal_gershgorin", rw, c.reg.literal_gershgorin);
  }
  if (obj.contains("lss")) {
    const json& l = obj.at("lss");
    const std::string lw = "solver.lss";
    check_keys(l, {"xi1", "xi2", "gamma1", "gamma2", "lambda_sign_corrected"}, lw);
    read(l, "xi1", lw, c.lss.xi1);
    read(l, "xi2", lw, c.lss.xi2);
    read(l, "gamma1", lw, c.lss.gamma1);
    read(l, "gamma2", lw, c.lss.gamma2);
    read(l, "lambda_sign_corrected", lw, c.lss.lambda_sign_corrected);
  }
  if (obj.contains("cesp")) {
    const json& e = obj.at("cesp");
    const std::string ew = "solver.cesp";
    check_keys(e, {"inv_two_rho_x", "inv_two_rho_y"}, ew);
    read(e, "inv_two_rho_x", ew, c.cesp.inv_two_rho_x);
    read(e, "inv_two_rho_y", ew, c.cesp.inv_two_rho_y);
  }
  if (obj.contains("perturb")) {
    const json& p = obj.at("perturb");
    const std::string pw = "solver.perturb";
    check_keys(p, {"enabled", "a", "b", "z_tilde"}, pw);
    read(p, "enabled", pw, c.perturb.enabled);
    read(p, "a", pw, c.perturb.a);
    read(p, "b", pw, c.perturb.b);
    if (p.contains("z_tilde")) {
      c.perturb.z_tilde = vector_at(p.at("z_tilde"), pw + ".z_tilde");
    }
  }
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  return c;
}

Vector bound_at(const json& value, const std::string& path, Index d) {
  if (value.is_number()) return Vector::Constant(d, number_at(value, path));
  Vector v = vector_at(value, path);
  if (v.size() != d) {
    throw ConfigError(path + ": expected " + std::to_string(d) + " entries");
  }
  return v;
}

InitSpec parse_init(const json& obj, Index d) {
  const std::string w = "init";
  check_keys(obj, {"mode", "z0", "lo", "hi", "count"}, w);
  InitSpec init;
  std::string mode = "uniform_box";
  read(obj, "mode", w, mode);
  if (mode == "fixed") {
    init.mode = InitSpec::Mode::Fixed;
    if (!obj.contains("z0")) throw ConfigError("init.z0: missing");
    init.z0 = vector_at(obj.at("z0"), "init.z0");
    if (init.z0.size() != d) {
      throw ConfigError("init.z0: expected " + std::to_string(d) + " entries");
    }
    init.count = 1;
    read(obj, "count", w, init.count);
  } else if (mode == "uniform_box") {
    init.mode = InitSpec::Mode::UniformBox;
    init.lo = obj.contains("lo") ? bound_at(obj.at("lo"), "init.lo", d)
                                 : Vector::Constant(d, -5.0);
    init.hi = obj.contains("hi") ? bound_at(obj.at("hi"), "init.hi", d)
                                 : Vector::Constant(d, 5.0);
    if (!(init.lo.array() < init.hi.array()).all()) {
      throw ConfigError("init.lo: must be below init.hi componentwise");
    }
    read(obj, "count", w, init.count);
  } else {
    throw ConfigError("init.mode: expected 'fixed' or 'uniform_box'");
  }
  if (init.count < 1) throw ConfigError("init.count: must be >= 1");
  return init;
}

// --------------------------------------------------------------- JSON output

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

json report_json(const FixedPointReport& r) {
  json spectrum = json::array();
  for (Index i = 0; i < r.gda_jac_spectrum.size(); ++i) {
    spectrum.push_back({r.gda_jac_spectrum[i].real(), r.gda_jac_spectrum[i].imag()});
  }
  return {{"verdict", to_string(r.verdict)},
          {"point", vector_json(r.point.values())},
          {"omega_norm", r.omega_norm},
          {"lambda_x", r.lambda_x},
          {"lambda_y", r.lambda_y},
          {"dnd_map_radius", finite_or_null(r.dnd_map_radius)},
          {"gda_jac_spectrum", spectrum}};
}

std::string timestamp_utc() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// -------------------------------------------------------------------- misc

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string init_hash(const std::vector<Vector>& points) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const Vector& p : points) {
    for (Index i = 0; i < p.size(); ++i) {
      const double v = p[i];
      unsigned char bytes[sizeof v];
      std::memcpy(bytes, &v, sizeof v);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
      }
    }
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("cannot write " + path.string());
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ConfigError(what + ": '" + text + "' is not a number");
  }
  return v;
}

}  // namespace

// ------------------------------------------------------------------- config

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(doc,
             {"problem", "constraint", "algorithms", "init", "seed", "solver",
              "classify", "reference", "output"},
             "");
  if (!doc.contains("problem")) throw ConfigError("problem: missing");
  ExperimentConfig cfg;
  cfg.problem = parse_problem(doc.at("problem"));
  Dims dims;
  try {
    dims = make_builtin(cfg.problem).dims;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  if (doc.contains("constraint")) {
    cfg.constraint = parse_set(doc.at("constraint"), "constraint");
    if (cfg.constraint->dim() != dims.total()) {
      throw ConfigError("constraint: dimension does not match the problem");
    }
  }

  if (!doc.contains("algorithms")) throw ConfigError("algorithms: missing");
  const json& algos = doc.at("algorithms");
  if (!algos.is_array() || algos.empty()) {
    throw ConfigError("algorithms: expected a nonempty array of names");
  }
  for (std::size_t i = 0; i < algos.size(); ++i) {
    const std::string path = "algorithms[" + std::to_string(i) + "]";
    if (!algos[i].is_string()) throw ConfigError(path + ": expected a string");
    std::string name = algos[i].get<std::string>();
    if (name == kConstrainedAlgorithm) {
      if (!cfg.constraint) {
        throw ConfigError(path + ": '" + name + "' needs a constraint");
      }
    } else {
      try {
        parse_algorithm(name);
      } catch (const ArgumentError& e) {
        throw ConfigError(path + ": " + e.what());
      }
    }
    cfg.algorithms.push_back(std::move(name));
  }

  cfg.init = doc.contains("init") ? parse_init(doc.at("init"), dims.total())
                                  : parse_init(json::object(), dims.total());
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("solver")) cfg.solver = parse_solver(doc.at("solver"));
  if (doc.contains("classify")) {
    const json& c = doc.at("classify");
    check_keys(c, {"tol", "margin", "cluster_radius"}, "classify");
    read(c, "tol", "classify", cfg.classify.tol);
    read(c, "margin", "classify", cfg.classify.margin);
    read(c, "cluster_radius", "classify", cfg.classify.cluster_radius);
    if (!(cfg.classify.tol > 0 && cfg.classify.margin > 0 &&
          cfg.classify.cluster_radius > 0)) {
      throw ConfigError("classify: tol, margin and cluster_radius must be positive");
    }
  }
  read(doc, "reference", "", cfg.reference);
  if (!cfg.reference.empty() &&
      std::find(cfg.algorithms.begin(), cfg.algorithms.end(), cfg.reference) ==
          cfg.algorithms.end()) {
    throw ConfigError("reference: must be one of the listed algorithms");
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, {"trace_dir", "summary_path", "plot_data_path"}, "output");
    read(o, "trace_dir", "output", cfg.output.trace_dir);
    read(o, "summary_path", "output", cfg.output.summary_path);
    read(o, "plot_data_path", "output", cfg.output.plot_data_path);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ConvexSet parse_constraint_json(const std::string& json_text) {
  try {
    return parse_set(json::parse(json_text), "constraint");
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

Vector parse_vector_list(const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.empty()) throw ConfigError("empty vector");
  Vector v(static_cast<Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    v[static_cast<Index>(i)] =
        parse_double(parts[i], "vector entry " + std::to_string(i));
  }
  return v;
}

// ---------------------------------------------------------------------- rng

RunRng::RunRng(std::uint64_t seed, std::uint64_t run)
    : state_(seed ^ (0x9E3779B97F4A7C15ULL * (run + 1))) {
  next();  // decorrelate neighbouring keys
}

std::uint64_t RunRng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RunRng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

Vector initial_point(const ExperimentConfig& config, int run) {
  const InitSpec& init = config.init;
  if (init.mode == InitSpec::Mode::Fixed) return init.z0;
  RunRng rng(config.seed, static_cast<std::uint64_t>(run));
  Vector z(init.lo.size());
  for (Index i = 0; i < z.size(); ++i) {
    z[i] = init.lo[i] + (init.hi[i] - init.lo[i]) * rng.uniform();
  }
  return z;
}

// -------------------------------------------------------------------- sweep

const AlgorithmSummary& SweepSummary::at(const std::string& algorithm) const {
  for (const AlgorithmSummary& a : algorithms) {
    if (a.algorithm == algorithm) return a;
  }
  throw ArgumentError("no summary for algorithm '" + algorithm + "'");
}

SolveOutcome solve_one(const ExperimentConfig& config, const GameOracle& game,
                       const std::string& algorithm, const Vector& z0, int run) {
  SolveOutcome out;
  const JointPoint start(z0, game.dims);
  if (algorithm == kConstrainedAlgorithm) {
    if (!config.constraint) throw ArgumentError("no constraint configured");
    ConstrainedResult res =
        run_second_constrained(game, *config.constraint, start, config.solver,
                               config.classify.tol);
    out.trace = std::move(res.trace);
    out.record.report = std::move(res.report);
  } else {
    out.trace = nashdyn::run(algorithm, game, start, config.solver);
    if (out.trace.status == RunStatus::Converged) {
      out.record.report =
          classify_unconstrained(game, out.trace.final_point(), config.classify.tol,
                                 config.classify.margin, config.solver);
    }
  }
  RunRecord& r = out.record;
  r.run = run;
  r.algorithm = algorithm;
  r.z0 = z0;
  r.status = out.trace.status;
  r.iterations = out.trace.iterations();
  r.final_point = out.trace.steps.back().z;
  r.message = out.trace.message;
  r.armijo_exhausted = out.trace.armijo_exhausted;
  r.stalled_steps = out.trace.stalled_steps;
  r.boundary_steps = static_cast<int>(
      std::count_if(out.trace.steps.begin(), out.trace.steps.end(),
                    [](const TraceStep& s) { return s.mode == StepMode::Boundary; }));
  return out;
}

SweepSummary sweep(const ExperimentConfig& config,
                   std::vector<IterateTrace>* traces) {
  const GameOracle game = make_builtin(config.problem);
  SweepSummary summary;
  summary.problem = to_string(config.problem.kind);
  summary.seed = config.seed;
  summary.count = config.init.count;
  summary.reference =
      config.reference.empty() ? config.algorithms.front() : config.reference;

  std::vector<Vector> starts;
  for (int i = 0; i < config.init.count; ++i) {
    starts.push_back(initial_point(config, i));
  }
  summary.init_hash = init_hash(starts);

  for (int i = 0; i < config.init.count; ++i) {
    for (const std::string& algo : config.algorithms) {
      try {
        SolveOutcome o = solve_one(config, game, algo, starts[i], i);
        summary.runs.push_back(std::move(o.record));
        if (traces) traces->push_back(std::move(o.trace));
      } catch (const std::exception& e) {
        RunRecord r;
        r.run = i;
        r.algorithm = algo;
        r.z0 = starts[i];
        r.status = RunStatus::EvalError;
        r.final_point = starts[i];
        r.message = e.what();
        summary.runs.push_back(std::move(r));
        if (traces) {
          IterateTrace t;
          t.dims = game.dims;
          t.algorithm = algo;
          t.status = RunStatus::EvalError;
          t.message = e.what();
          TraceStep s;
          s.z = starts[i];
          s.omega_norm = s.merit = std::nan("");
          t.steps.push_back(std::move(s));
          traces->push_back(std::move(t));
        }
      }
    }
  }

  const std::size_t n_algos = config.algorithms.size();
  const auto ref_pos = std::find(config.algorithms.begin(),
                                 config.algorithms.end(), summary.reference) -
                       config.algorithms.begin();
  for (std::size_t a = 0; a < n_algos; ++a) {
    AlgorithmSummary s;
    s.algorithm = config.algorithms[a];
    std::vector<double> iters;
    std::vector<double> diffs;
    for (int i = 0; i < config.init.count; ++i) {
      const RunRecord& r = summary.runs[i * n_algos + a];
      const RunRecord& ref = summary.runs[i * n_algos + ref_pos];
      ++s.n_runs;
      switch (r.status) {
        case RunStatus::Converged: ++s.n_converged; break;
        case RunStatus::Diverged: ++s.n_diverged; break;
        case RunStatus::MaxIters: ++s.n_maxiter; break;
        case RunStatus::EvalError: ++s.n_evalerror; break;
      }
      if (r.status != RunStatus::Converged) continue;
      iters.push_back(r.iterations);
      if (ref.status == RunStatus::Converged) {
        s.paired_diff.push_back(r.iterations - ref.iterations);
        diffs.push_back(r.iterations - ref.iterations);
      }
      if (!r.report) continue;
      const double radius_scale = config.classify.cluster_radius;
      auto it = std::find_if(s.clusters.begin(), s.clusters.end(),
                             [&](const Cluster& c) {
                               return (c.center - r.final_point).norm() <=
                                      radius_scale * (1.0 + c.center.norm());
                             });
      if (it != s.clusters.end()) {
        ++it->count;
      } else {
        s.clusters.push_back(Cluster{r.final_point, 1, *r.report});
      }
    }
    if (!iters.empty()) {
      s.iter_min = static_cast<int>(*std::min_element(iters.begin(), iters.end()));
      s.iter_max = static_cast<int>(*std::max_element(iters.begin(), iters.end()));
      s.iter_median = median_of(iters);
    }
    s.paired_diff_median = median_of(diffs);
    summary.algorithms.push_back(std::move(s));
  }
  return summary;
}

std::string summary_json(const SweepSummary& summary, bool with_timestamp) {
  json doc;
  doc["problem"] = summary.problem;
  doc["seed"] = summary.seed;
  doc["count"] = summary.count;
  doc["reference"] = summary.reference;
  doc["init_hash"] = summary.init_hash;
  json algos = json::array();
  for (const AlgorithmSummary& a : summary.algorithms) {
    json clusters = json::array();
    for (const Cluster& c : a.clusters) {
      clusters.push_back({{"center", vector_json(c.center)},
                          {"count", c.count},
                          {"report", report_json(c.report)}});
    }
    algos.push_back({{"algorithm", a.algorithm},
                     {"n_runs", a.n_runs},
                     {"n_converged", a.n_converged},
                     {"n_diverged", a.n_diverged},
                     {"n_maxiter", a.n_maxiter},
                     {"n_evalerror", a.n_evalerror},
                     {"iterations",
                      {{"min", a.iter_min},
                       {"median", a.iter_median},
                       {"max", a.iter_max}}},
                     {"clusters", clusters},
                     {"paired_diff",
                      {{"reference", summary.reference},
                       {"median", a.paired_diff_median},
                       {"values", a.paired_diff}}}});
  }
  doc["algorithms"] = algos;
  json runs = json::array();
  for (const RunRecord& r : summary.runs) {
    json item = {{"run", r.run},
                 {"algorithm", r.algorithm},
                 {"status", to_string(r.status)},
                 {"iterations", r.iterations},
                 {"z0", vector_json(r.z0)},
                 {"final", vector_json(r.final_point)},
                 {"boundary_steps", r.boundary_steps},
                 {"armijo_exhausted", r.armijo_exhausted},
                 {"stalled_steps", r.stalled_steps}};
    if (r.report) item["report"] = report_json(*r.report);
    if (!r.message.empty()) item["message"] = r.message;
    runs.push_back(std::move(item));
  }
  doc["runs"] = runs;
  if (with_timestamp) doc["generated_at"] = timestamp_utc();
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------- trace CSV

std::string trace_csv(const IterateTrace& trace) {
  std::ostringstream out;
  const Index d = trace.dims.total();
  out << "k,mode,alpha,omega_norm,merit";
  for (Index i = 0; i < d; ++i) out << ",z_" << i;
  out << "\n";
  std::string last;
  for (const TraceStep& s : trace.steps) {
    std::ostringstream row;
    row << s.k << ',' << to_string(s.mode) << ',' << format_double(s.alpha)
        << ',' << format_double(s.omega_norm) << ',' << format_double(s.merit);
    for (Index i = 0; i < s.z.size(); ++i) row << ',' << format_double(s.z[i]);
    last = row.str();
    out << last << "\n";
  }
  out << "# algorithm: " << trace.algorithm << "\n";
  out << "# dims: " << trace.dims.n << ',' << trace.dims.m << "\n";
  if (!trace.message.empty()) {
    std::string msg = trace.message;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << "# message: " << msg << "\n";
  }
  out << "# status: " << to_string(trace.status) << ',' << last << "\n";
  return out.str();
}

void write_trace_csv(const IterateTrace& trace, const std::filesystem::path& path) {
  write_text(path, trace_csv(trace));
}

IterateTrace parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,mode,alpha,omega_norm,merit", 0) != 0) {
    throw ConfigError("trace CSV: missing header");
  }
  const std::size_t columns = split(line, ',').size();
  if (columns < 6) throw ConfigError("trace CSV: no coordinate columns");
  IterateTrace trace;
  trace.dims = Dims{static_cast<Index>(columns - 5), 0};
  bool have_dims = false;
  bool have_status = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2);
      std::string value = line.substr(colon + 1);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      if (key == "algorithm") {
        trace.algorithm = value;
      } else if (key == "dims") {
        const auto nm = split(value, ',');
        if (nm.size() != 2) throw ConfigError("trace CSV: bad dims line");
        trace.dims = Dims{static_cast<Index>(parse_double(nm[0], "dims")),
                          static_cast<Index>(parse_double(nm[1], "dims"))};
        have_dims = true;
      } else if (key == "message") {
        trace.message = value;
      } else if (key == "status") {
        trace.status = parse_run_status(value.substr(0, value.find(',')));
        have_status = true;
      }
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != columns) {
      throw ConfigError("trace CSV: row with " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(columns));
    }
    TraceStep s;
    s.k = static_cast<int>(parse_double(cells[0], "k"));
    s.mode = parse_step_mode(cells[1]);
    s.alpha = parse_double(cells[2], "alpha");
    s.omega_norm = parse_double(cells[3], "omega_norm");
    s.merit = parse_double(cells[4], "merit");
    s.z.resize(static_cast<Index>(columns - 5));
    for (std::size_t i = 5; i < columns; ++i) {
      s.z[static_cast<Index>(i - 5)] = parse_double(cells[i], "z");
    }
    trace.steps.push_back(std::move(s));
  }
  if (trace.steps.empty()) throw ConfigError("trace CSV: no data rows");
  if (!have_status) throw ConfigError("trace CSV: missing status line");
  if (!have_dims) {
    const Index d = static_cast<Index>(columns - 5);
    trace.dims = Dims{d - d / 2, d / 2};
  }
  return trace;
}

IterateTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open trace file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace_csv(buf.str());
}

// ---------------------------------------------------------------- plot data

std::string trace_plot_data(const std::vector<IterateTrace>& traces) {
  std::ostringstream out;
  const bool planar = !traces.empty() && traces.front().dims.total() == 2;
  out << (planar ? "algorithm,k,mode,omega_norm,z_0,z_1\n"
                 : "algorithm,k,mode,omega_norm\n");
  for (const IterateTrace& t : traces) {
    for (const TraceStep& s : t.steps) {
      out << t.algorithm << ',' << s.k << ',' << to_string(s.mode) << ','
          << format_double(s.omega_norm);
      if (planar) {
        out << ',' << format_double(s.z[0]) << ',' << format_double(s.z[1]);
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string sweep_plot_data(const SweepSummary& summary) {
  std::ostringstream out;
  const Index d = summary.runs.empty() ? 0 : summary.runs.front().z0.size();
  out << "run,algorithm,status,iterations,verdict";
  for (Index i = 0; i < d; ++i) out << ",z0_" << i;
  for (Index i = 0; i < d; ++i) out << ",final_" << i;
  out << "\n";
  for (const RunRecord& r : summary.runs) {
    out << r.run << ',' << r.algorithm << ',' << to_string(r.status) << ','
        << r.iterations << ',' << (r.report ? to_string(r.report->verdict) : "");
    for (Index i = 0; i < d; ++i) out << ',' << format_double(r.z0[i]);
    for (Index i = 0; i < d; ++i) out << ',' << format_double(r.final_point[i]);
    out << "\n";
  }
  return out.str();
}

// --------------------------------------------------------------- execution

int execute_experiment(const ExperimentConfig& config, std::ostream& log) {
  std::vector<IterateTrace> traces;
  const bool single = config.init.count == 1;
  const bool keep = single || !config.output.trace_dir.empty();
  const SweepSummary summary = sweep(config, keep ? &traces : nullptr);

  if (!config.output.trace_dir.empty()) {
    const std::filesystem::path dir(config.output.trace_dir);
    const std::size_t n_algos = config.algorithms.size();
    for (std::size_t t = 0; t < traces.size(); ++t) {
      const std::string name = single
                                   ? traces[t].algorithm
                                   : "run" + std::to_string(t / n_algos) + "_" +
                                         traces[t].algorithm;
      write_trace_csv(traces[t], dir / (name + ".csv"));
    }
  }
  if (!config.output.summary_path.empty()) {
    write_text(config.output.summary_path, summary_json(summary));
  }
  if (!config.output.plot_data_path.empty()) {
    write_text(config.output.plot_data_path,
               single ? trace_plot_data(traces) : sweep_plot_data(summary));
  }

  bool numeric_failure = false;
  for (const AlgorithmSummary& a : summary.algorithms) {
    log << a.algorithm << ": runs=" << a.n_runs << " converged=" << a.n_converged
        << " diverged=" << a.n_diverged << " maxiter=" << a.n_maxiter
        << " evalerror=" << a.n_evalerror << " median_iters=" << a.iter_median
        << " clusters=" << a.clusters.size() << "\n";
    numeric_failure = numeric_failure || (single && a.n_evalerror > 0);
  }
  if (single) {
    for (const RunRecord& r : summary.runs) {
      log << "  " << r.algorithm << " final=(";
      for (Index i = 0; i < r.final_point.size(); ++i) {
        log << (i ? "," : "") << format_double(r.final_point[i]);
      }
      log << ") iterations=" << r.iterations << " status=" << to_string(r.status);
      if (r.report) log << " verdict=" << to_string(r.report->verdict);
      if (!r.message.empty()) log << " note=\"" << r.message << "\"";
      log << "\n";
    }
  }
  return numeric_failure ? 3 : 0;
}

int run_experiment(const std::filesystem::path& path) {
  try {
    return execute_experiment(load_config(path), std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace nashdyn::bench
