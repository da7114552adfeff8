#ifndef PROXPG_ALGORITHMS_HPP_
#define PROXPG_ALGORITHMS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "proxpg/core.hpp"
#include "proxpg/estimators.hpp"
#include "proxpg/prox.hpp"

namespace proxpg {

struct SpgConfig {
  double eta = 0.0;
  std::size_t N = 1;
  std::size_t T = 1;
  std::uint64_t seed = 0;
};

struct PageConfig {
  double eta = 0.0;
  std::size_t N1 = 1;
  std::size_t N2 = 1;
  double p = 1.0;
  std::size_t T = 1;
  std::uint64_t seed = 0;
};

struct IterationRecord {
  std::size_t t = 0;
  Vector theta;
  /// g^t, absent when the run never formed an estimator at theta^t.
  std::optional<Vector> estimator;
  std::optional<Branch> branch;
  std::size_t samples_used = 0;
  /// Draws consumed through the estimator at theta^t, inclusive.
  std::size_t cumulative_samples = 0;
  // Exact quantities, filled when tracking is requested on an enumerable env.
  std::optional<double> grad_mapping_norm;   // ||G_eta(theta^t)|| with grad J
  std::optional<double> subdiff_distance;    // dist(grad J, dG(theta^t))
  std::optional<double> objective;           // F(theta^t)
  std::optional<double> estimator_error;     // ||g^t - grad J(theta^t)||^2
};

struct RunTrace {
  std::vector<IterationRecord> records;
  /// Index of the returned iterate, uniform on {1, ..., last iteration}.
  std::size_t output_index = 0;
  double eta = 0.0;
  double wall_time_seconds = 0.0;
  bool stopped_early = false;
  bool budget_exceeded = false;

  const IterationRecord& output() const { return records.at(output_index); }
  /// Number of completed prox steps.
  std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }
};

struct RunOptions {
  bool track_exact = false;
  /// Checked after each new iterate is recorded (t >= 1); true stops the run.
  std::function<bool(const IterationRecord&)> stop;
  /// Stop before an estimator would push cumulative draws past this cap.
  std::optional<std::size_t> sample_cap;
  unsigned workers = 1;
};

/// Stream for the N draws of the estimator formed at iterate t.
StreamFactory outcome_streams(std::uint64_t seed, std::size_t t);

RunTrace run_spg(const Environment& env, const Regularizer& reg, const SpgConfig& config,
                 const ParamVector& theta0, const RunOptions& options = {});

RunTrace run_page(const Environment& env, const Regularizer& reg, const PageConfig& config,
                  const ParamVector& theta0, const RunOptions& options = {});

struct Stationarity {
  double subdiff_distance = 0.0;
  double gradient_mapping_norm = 0.0;
};

/// Both stationarity measures at theta. Exact by enumeration unless
/// `monte_carlo_samples` is given, in which case grad J is replaced by a
/// batch estimate seeded by `seed`.
Stationarity measure_stationarity(const Environment& env, const Regularizer& reg,
                                  const Vector& theta, double eta,
                                  std::optional<std::size_t> monte_carlo_samples = std::nullopt,
                                  std::uint64_t seed = 0);

/// Deterministic proximal gradient ascent with exact gradients; returns all
/// iterates theta^0..theta^iterations.
std::vector<Vector> proximal_gradient_ascent(const Environment& env, const Regularizer& reg,
                                             const Vector& theta0, double eta,
                                             std::size_t iterations);

/// Upper bound on F* - F(theta0): U + max(0, G(theta0)) - F(theta0).
double default_delta(const Environment& env, const Regularizer& reg, const Vector& theta0);

}  // namespace proxpg

#endif  // PROXPG_ALGORITHMS_HPP_
