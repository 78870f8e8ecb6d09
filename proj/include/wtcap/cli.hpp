#pragma once

// Command-line layer: run configuration, manifests, the validation suite and
// the `wtcap` entry point. Power values in dB are converted here; everything
// below this layer works in linear scale.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtcap/bisect.hpp"
#include "wtcap/channel.hpp"
#include "wtcap/newton.hpp"
#include "wtcap/oracle.hpp"

namespace wtcap::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,  // I/O failures and other unexpected errors
  kExitParse = 2,     // bad flags, channel file, manifest or parameter values
  kExitSolver = 3,
  kExitValidate = 4,
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double p) { return 10.0 * std::log10(p); }

struct ValidateOptions {
  int fd_points = 50;
  std::uint64_t seed = 7;
  double grad_tol = 1e-6;
  double hess_tol = 1e-5;
  /// Barrier limit of the reference solve used by the saddle and MC checks.
  double saddle_t_max = 4e7;
  double saddle_epsilon = 1e-7;  // residual floor of double precision near t = 4e7
  int saddle_points = 100;
  double saddle_radius = 1e-2;
  double saddle_tol = 1e-6;
  double mc_upper_tol = 1e-6;
  double mc_slack = 0.05;
  /// Fault injection: multiplies the Txy block before the Hessian FD check.
  double txy_scale = 1.0;
};

/// Every parameter a command depends on, after defaults, manifest and flags.
struct RunConfig {
  SolverConfig solver;
  double epsilon_rate = 1e-4;
  double delta_power = 1e-3;
  bool mc_enabled = false;
  McConfig mc;
  /// Overrides of the channel file's powers (linear).
  std::optional<double> total_power;
  std::optional<std::vector<double>> interference_powers;
  /// Sweep grid of total powers (linear, strictly increasing).
  std::vector<double> grid;
  ValidateOptions validate;
  unsigned threads = 1;
  /// Rate columns of CSV outputs in bits instead of nats.
  bool bits = false;

  BisectConfig bisect() const { return {epsilon_rate, delta_power, solver}; }
};

nlohmann::json to_json(const RunConfig& cfg);
/// Applies the fields present in `j` on top of `cfg`; throws ParseError.
void merge_json(RunConfig& cfg, const nlohmann::json& j);

struct RunManifest {
  std::string command;
  std::string channel_path;
  nlohmann::json config;
  std::vector<std::string> outputs;
  std::string version = kVersion;
  double wall_seconds = 0.0;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

/// Writes `content` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct CheckResult {
  std::string name;
  bool passed;
  double measured;
  double threshold;
  std::string detail;
};

/// Gradient and Hessian finite-difference checks, Hessian definiteness and
/// residual contraction along a solve, saddle inequalities under random
/// perturbations, and the Monte-Carlo bounds.
std::vector<CheckResult> run_validation(const ChannelSet& ch, const RunConfig& cfg);

/// Cheap indicator that Algorithm-1 output may not maximize C(R): the total
/// power constraint is slack at R' while the Gram matrices of the active
/// interference constraints sum to a singular matrix.
bool singular_case_hint(const ChannelSet& ch, const SaddleSolution& s);

/// Entry point of the `wtcap` tool. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wtcap::cli
