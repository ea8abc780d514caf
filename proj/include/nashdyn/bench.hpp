#pragma once

#include "nashdyn/classify.hpp"
#include "nashdyn/constrained.hpp"
#include "nashdyn/convex_set.hpp"
#include "nashdyn/dynamics.hpp"
#include "nashdyn/game.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nashdyn::bench {

/// Invalid or unreadable experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Name of the projected solver in `algorithms`; it needs a constraint.
inline constexpr const char* kConstrainedAlgorithm = "second-constrained";

struct InitSpec {
  enum class Mode { Fixed, UniformBox };
  Mode mode = Mode::UniformBox;
  Vector z0;  // Fixed
  Vector lo;  // UniformBox
  Vector hi;
  int count = 1;
};

struct OutputSpec {
  std::string trace_dir;
  std::string summary_path;
  std::string plot_data_path;
};

struct ClassifySpec {
  double tol = 1e-5;
  double margin = 1e-8;
  /// Terminal points closer than this (relative to 1 + |center|) share a
  /// cluster.
  double cluster_radius = 1e-3;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::optional<ConvexSet> constraint;
  std::vector<std::string> algorithms;
  InitSpec init;
  std::uint64_t seed = 0;
  SolverConfig solver;
  ClassifySpec classify;
  /// Paired iteration differences are taken against this algorithm; empty
  /// means the first entry of `algorithms`.
  std::string reference;
  OutputSpec output;
};

/// Parses a JSON document; throws ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

ConvexSet parse_constraint_json(const std::string& json_text);

/// SplitMix64 stream keyed by (seed, run index).
class RunRng {
 public:
  RunRng(std::uint64_t seed, std::uint64_t run);
  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

/// Initial point of run `run`; identical for every algorithm.
Vector initial_point(const ExperimentConfig& config, int run);

struct RunRecord {
  int run = 0;
  std::string algorithm;
  Vector z0;
  RunStatus status = RunStatus::MaxIters;
  int iterations = 0;
  Vector final_point;
  std::optional<FixedPointReport> report;
  std::string message;
  int boundary_steps = 0;
  int armijo_exhausted = 0;
  int stalled_steps = 0;
};

struct Cluster {
  Vector center;
  int count = 0;
  FixedPointReport report;
};

struct AlgorithmSummary {
  std::string algorithm;
  int n_runs = 0;
  int n_converged = 0;
  int n_diverged = 0;
  int n_maxiter = 0;
  int n_evalerror = 0;
  /// Iteration statistics over converged runs; zero when none converged.
  int iter_min = 0;
  double iter_median = 0.0;
  int iter_max = 0;
  std::vector<Cluster> clusters;
  /// iterations(this) - iterations(reference) over runs where both converged.
  std::vector<int> paired_diff;
  double paired_diff_median = 0.0;
};

struct SweepSummary {
  std::string problem;
  std::uint64_t seed = 0;
  int count = 0;
  std::string reference;
  /// FNV-1a hash of the initial points; the same for every algorithm.
  std::string init_hash;
  std::vector<AlgorithmSummary> algorithms;
  std::vector<RunRecord> runs;

  const AlgorithmSummary& at(const std::string& algorithm) const;
};

/// One solve with full trace.
struct SolveOutcome {
  IterateTrace trace;
  RunRecord record;
};

SolveOutcome solve_one(const ExperimentConfig& config, const GameOracle& game,
                       const std::string& algorithm, const Vector& z0, int run);

/// Runs every algorithm from every initial point, sequentially. Individual
/// failures are recorded, never thrown. When `traces` is non-null every trace
/// is kept there in run-major order.
SweepSummary sweep(const ExperimentConfig& config,
                   std::vector<IterateTrace>* traces = nullptr);

/// Summary as JSON text (two-space indented). The `generated_at` field is the
/// only non-deterministic entry.
std::string summary_json(const SweepSummary& summary, bool with_timestamp = true);

void write_trace_csv(const IterateTrace& trace, const std::filesystem::path& path);
std::string trace_csv(const IterateTrace& trace);
IterateTrace read_trace_csv(const std::filesystem::path& path);
IterateTrace parse_trace_csv(const std::string& text);

/// Iterates of 2-D problems (k, z_0, z_1) or |omega| against k otherwise.
std::string trace_plot_data(const std::vector<IterateTrace>& traces);
/// One row per run: start, end, status, iterations, verdict.
std::string sweep_plot_data(const SweepSummary& summary);

/// Executes a parsed configuration and writes its outputs; progress lines go
/// to `log`. Returns 0, or 3 when a single-start solve hit a numeric failure.
int execute_experiment(const ExperimentConfig& config, std::ostream& log);

/// Executes `config` (solve for a single fixed start, sweep otherwise) and
/// writes the configured outputs. Returns 0, 2 (configuration) or 3
/// (numeric failure).
int run_experiment(const std::filesystem::path& path);

/// Parses "v1,v2,..." into a vector; ConfigError on malformed input.
Vector parse_vector_list(const std::string& text);

}  // namespace nashdyn::bench
