#ifndef PROXPG_HARNESS_HPP_
#define PROXPG_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "proxpg/algorithms.hpp"
#include "proxpg/core.hpp"
#include "proxpg/prox.hpp"

namespace proxpg {

/// Optional replacements for an environment's declared bounds.
struct DeclaredOverrides {
  std::optional<double> reward_bound;
  std::optional<double> score_bound;
  std::optional<double> score_hessian_bound;
  std::optional<double> reward_grad_bound;
  std::optional<double> reward_hessian_bound;
  std::optional<double> weight_bound;

  bool empty() const;
  TheoryConstants apply(TheoryConstants tc) const;
  friend bool operator==(const DeclaredOverrides&, const DeclaredOverrides&) = default;
};

struct EnvironmentSpec {
  /// softmax_bandit | theta_reward_bandit | direct_bandit | point_mass | tabular_mdp
  std::string kind = "softmax_bandit";
  std::vector<double> rewards;
  std::optional<double> box_radius;
  double alpha = 0.5;
  std::uint64_t direction_seed = 0;
  double floor = 1e-3;
  std::vector<double> center;
  double amplitude = 1.0;
  double width = 1.0;
  int states = 2;
  int actions = 2;
  int horizon = 3;
  double gamma = 0.9;
  std::uint64_t mdp_seed = 0;
  double enumeration_cap = 1e6;
  DeclaredOverrides declared;

  friend bool operator==(const EnvironmentSpec&, const EnvironmentSpec&) = default;
};

struct RegularizerSpec {
  /// zero | l2 | l1 | box | simplex | lower_bounded_simplex
  std::string kind = "zero";
  double lambda = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  double floor = 1e-3;

  friend bool operator==(const RegularizerSpec&, const RegularizerSpec&) = default;
};

struct AlgorithmSpec {
  std::string name = "spg";          // spg | page
  std::string schedule = "manual";   // manual | theorem2 | theorem3
  std::optional<double> eta;
  std::uint64_t batch = 1;
  std::uint64_t iterations = 1;
  std::uint64_t n1 = 1;
  std::uint64_t n2 = 1;
  double p = 1.0;
  std::optional<double> epsilon;
  std::optional<double> delta_bound;
  double c_n1 = 1.0;
  std::optional<double> c_t;
  bool empirical_sigma = false;
  std::vector<double> initial;  // empty: zeros, or the simplex center for simplex regularizers

  friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

struct RunSpec {
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "proxpg_out";
  bool track_exact = true;
  std::uint64_t workers = 1;
  bool dry_run = false;

  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct SweepSpec {
  std::vector<double> epsilons;
  std::vector<std::string> algorithms{"spg", "page"};
  std::optional<std::uint64_t> sample_cap;
  std::optional<std::uint64_t> max_iterations;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  RegularizerSpec regularizer;
  AlgorithmSpec algorithm;
  RunSpec run;
  SweepSpec sweep;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Environment variable that, when set, replaces run.output_dir.
inline constexpr const char* kOutputDirEnv = "PROXPG_OUTPUT_DIR";

/// Parses TOML text. Throws ConfigError naming the line and field.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

std::unique_ptr<Environment> make_environment(const EnvironmentSpec& spec);
std::unique_ptr<Regularizer> make_regularizer(const RegularizerSpec& spec, Eigen::Index dim);

/// A validated, fully resolved experiment.
struct Plan {
  std::unique_ptr<Environment> env;
  std::unique_ptr<Regularizer> reg;
  Vector theta0;
  std::string algorithm;
  SpgConfig spg;    // seed filled per run
  PageConfig page;  // seed filled per run
  nlohmann::json schedule;
  std::vector<std::string> warnings;
};

/// Builds environment, regularizer, initial point and schedule. Every
/// failure surfaces as a ConfigError-class Error.
Plan resolve(const ExperimentConfig& config);

std::filesystem::path output_dir(const ExperimentConfig& config);

/// Trace as CSV: t,cumulative_samples,grad_mapping_norm,objective,branch.
std::string trace_csv(const RunTrace& trace);

struct ScheduleRequest {
  double eps = 0.1;
  int theorem = 2;
  TheoryConstants constants;
  /// Direct overrides of the derived constants.
  std::optional<double> L;
  std::optional<double> sigma_sq;
  std::optional<double> C;
  double delta = 1.0;
  std::optional<double> eta;
  double c_n1 = 1.0;
  std::optional<double> c_t;
};

nlohmann::json schedule_json(const ScheduleRequest& request);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Subcommands. Each returns the process exit status:
//   0 success, 1 failed check or runtime error, 2 config error, 3 divergence.
int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);
int cmd_check(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);
int cmd_schedule(const ScheduleRequest& request, std::ostream& out, std::ostream& err);
int cmd_sweep(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

}  // namespace proxpg

#endif  // PROXPG_HARNESS_HPP_
