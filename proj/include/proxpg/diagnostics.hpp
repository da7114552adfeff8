#ifndef PROXPG_DIAGNOSTICS_HPP_
#define PROXPG_DIAGNOSTICS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxpg/algorithms.hpp"
#include "proxpg/core.hpp"
#include "proxpg/prox.hpp"
#include "proxpg/theory.hpp"

namespace proxpg {

/// Outcome of one diagnostic. `pass` is empty when the check is
/// inconclusive. Assertion-grade reports decide a `check` exit status;
/// the others are informational.
struct Report {
  std::string name;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json values = nlohmann::json::object();
  nlohmann::json bands = nlohmann::json::object();
  std::optional<bool> pass;
  bool assertion = true;

  nlohmann::json to_json() const;
};

/// Running mean and variance of vectors (Welford). Exact for constant input.
class RunningMoments {
 public:
  explicit RunningMoments(Eigen::Index dim);
  void add(const Vector& x);
  std::size_t count() const { return count_; }
  const Vector& mean() const { return mean_; }
  /// Unbiased per-component variance; requires count >= 2.
  Vector variance() const;
  /// Unbiased estimate of E||x - E x||^2.
  double trace_variance() const;

 private:
  std::size_t count_ = 0;
  Vector mean_;
  Vector m2_;
};

/// Mean of M score-gradient draws against grad J with z-sigma bands.
Report check_unbiasedness(const Environment& env, const Vector& theta, std::size_t m,
                          double z = 4.0, std::uint64_t seed = 0);

struct WeightVariance {
  std::optional<double> exact;  // sum_x pi_theta'(x) (w(x) - 1)^2
  double empirical = 0.0;       // Monte Carlo estimate under pi_theta'
  std::size_t samples = 0;
  std::optional<double> declared;  // C_w^2
  bool violation = false;
};

WeightVariance weight_variance(const Environment& env, const Vector& theta,
                               const Vector& theta_prime, std::size_t m = 100000,
                               std::uint64_t seed = 0);

struct Lemma3Gap {
  double lhs = 0.0;  // E_{theta'} ||g(x, theta') - g_w(x, theta, theta')||^2
  double rhs = 0.0;  // C ||theta - theta'||^2
};

Lemma3Gap lemma3_gap(const Environment& env, const Vector& theta, const Vector& theta_prime);

/// max ||grad J(a) - grad J(b)|| / ||a - b|| over random pairs from the
/// environment's natural domain. Throws EmptyProbe for pairs = 0.
double smoothness_probe(const Environment& env, std::size_t pairs, std::uint64_t seed = 0);

struct VarianceReduction {
  std::vector<double> spg_errors;
  std::vector<double> page_errors;
  double spg_mean = 0.0;
  double page_mean = 0.0;
  double ratio = 0.0;  // page_mean / spg_mean
};

/// Per-iteration exact estimator errors of two tracked traces over
/// iterations [from, to). Throws MismatchedTraces when the traces start from
/// different points or lack the requested errors.
VarianceReduction variance_reduction_report(const RunTrace& spg, const RunTrace& page,
                                            std::size_t from, std::size_t to);

/// Error-sum bound for one tracked PAGE trace; sum of errors over t < T.
ErrorSumBound error_sum_bound_from_trace(const RunTrace& page, const PageConfig& config,
                              const DerivedConstants& dc, double delta);

/// Largest observed |R|, ||grad log pi||, ||grad R|| over random (theta, x)
/// probes, each against its declared bound.
Report falsify_declared_bounds(const Environment& env, std::size_t probes = 10000,
                               std::uint64_t seed = 0);

/// Central differences of J against exact_gradient. Relative error per
/// component uses the denominator max(|g_i|, 1e-4).
Report finite_difference_check(const Environment& env, std::size_t probes = 20,
                               double step = 1e-5, double tolerance = 1e-5,
                               std::uint64_t seed = 0);

Report probability_sum_check(const Environment& env, std::size_t probes = 100,
                             double tolerance = 1e-10, std::uint64_t seed = 0);

/// Empirical variance of score_gradient over m draws against sigma^2.
Report variance_bound_check(const Environment& env, const Vector& theta, std::size_t m,
                            std::uint64_t seed = 0);

/// Largest exact E||g - grad J||^2 over random probe points; the opt-in
/// replacement for the declared sigma^2.
double empirical_sigma_sq(const Environment& env, std::size_t probes = 100,
                          std::uint64_t seed = 0);

/// The assertion battery used by `check`: declared bounds, probability sums,
/// finite differences, unbiasedness, variance bound, smoothness, and, when
/// C_w is declared, importance-weight and importance-sampling gap checks.
std::vector<Report> run_battery(const Environment& env, std::uint64_t seed = 0);

}  // namespace proxpg

#endif  // PROXPG_DIAGNOSTICS_HPP_
