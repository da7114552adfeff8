#include "proxpg/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "proxpg/error.hpp"

namespace proxpg {

namespace {

constexpr double kDivergenceNorm = 1e8;

StreamFactory root_streams(std::uint64_t seed) { return StreamFactory(seed); }

void check_iterate(const Vector& theta, std::size_t t) {
  if (!all_finite(theta) || theta.norm() > kDivergenceNorm) {
    throw Error(Errc::NumericalDivergence,
                "iterate " + std::to_string(t) + " is non-finite or exceeds norm 1e8");
  }
}

void validate_start(const Environment& env, const Regularizer& reg, double eta,
                    std::size_t T, const ParamVector& theta0) {
  if (T == 0) throw Error(Errc::EmptyRun, "T = 0 produces no iterate to output");
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw Error(Errc::InvalidArgument, "learning rate must be positive and finite");
  }
  if (theta0.size() != env.dim()) {
    throw Error(Errc::InvalidArgument, "initial point has the wrong dimension");
  }
  if (reg.value(theta0.values()) == std::numeric_limits<double>::infinity()) {
    throw Error(Errc::InfeasiblePoint, "initial point is outside the regularizer's domain");
  }
}

// Iteration driver shared by both methods. `estimate(t, records)` returns the
// estimator at records[t].theta; it is called for t < T, and for t = T when
// `estimate_last` is set.
template <typename Estimate>
RunTrace drive(const Environment& env, const Regularizer& reg, double eta, std::size_t T,
               std::uint64_t seed, const ParamVector& theta0, const RunOptions& options,
               bool estimate_last, Estimate estimate) {
  const auto start = std::chrono::steady_clock::now();
  const bool exact = options.track_exact && env.enumerable();

  RunTrace trace;
  trace.eta = eta;
  trace.records.reserve(T + 1);

  auto fill_exact = [&](IterationRecord& r) {
    if (!exact) return;
    const Vector grad = exact_gradient(env, r.theta);
    r.grad_mapping_norm = gradient_mapping(r.theta, grad, eta, reg).norm();
    r.subdiff_distance = reg.subdiff_dist(r.theta, grad);
    r.objective = composite_value(env, reg, r.theta);
  };
  // Returns false when the sample cap stops the run.
  auto attach_estimator = [&](std::size_t t) {
    EstimatorSample s = estimate(t, trace.records);
    IterationRecord& r = trace.records[t];
    const std::size_t before = t == 0 ? 0 : trace.records[t - 1].cumulative_samples;
    if (options.sample_cap && before + s.samples_used > *options.sample_cap) {
      trace.budget_exceeded = true;
      return false;
    }
    if (exact) r.estimator_error = (s.grad - exact_gradient(env, r.theta)).squaredNorm();
    r.samples_used = s.samples_used;
    r.cumulative_samples = before + s.samples_used;
    r.branch = s.branch;
    r.estimator = std::move(s.grad);
    return true;
  };

  IterationRecord first;
  first.t = 0;
  first.theta = theta0.values();
  fill_exact(first);
  trace.records.push_back(std::move(first));

  bool running = attach_estimator(0);
  for (std::size_t t = 0; running && t < T; ++t) {
    const IterationRecord& cur = trace.records[t];
    Vector next = reg.prox(cur.theta + eta * *cur.estimator, eta);
    check_iterate(next, t + 1);

    IterationRecord r;
    r.t = t + 1;
    r.theta = std::move(next);
    r.cumulative_samples = cur.cumulative_samples;
    fill_exact(r);
    trace.records.push_back(std::move(r));

    if (options.stop && options.stop(trace.records.back())) {
      trace.stopped_early = t + 1 < T;
      break;
    }
    if (t + 1 < T || estimate_last) running = attach_estimator(t + 1);
  }

  const std::size_t last = trace.iterations();
  if (last > 0) {
    RandomStream pick = root_streams(seed).child("output").stream();
    trace.output_index = 1 + static_cast<std::size_t>(pick.below(last));
  }
  trace.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

}  // namespace

StreamFactory outcome_streams(std::uint64_t seed, std::size_t t) {
  return root_streams(seed).child("outcomes", t);
}

RunTrace run_spg(const Environment& env, const Regularizer& reg, const SpgConfig& config,
                 const ParamVector& theta0, const RunOptions& options) {
  validate_start(env, reg, config.eta, config.T, theta0);
  if (config.N == 0) throw Error(Errc::InvalidArgument, "batch size must be at least 1");
  auto estimate = [&](std::size_t t, const std::vector<IterationRecord>& records) {
    return batch_gradient(env, records[t].theta, config.N, outcome_streams(config.seed, t),
                          options.workers);
  };
  return drive(env, reg, config.eta, config.T, config.seed, theta0, options, false, estimate);
}

RunTrace run_page(const Environment& env, const Regularizer& reg, const PageConfig& config,
                  const ParamVector& theta0, const RunOptions& options) {
  validate_start(env, reg, config.eta, config.T, theta0);
  if (config.N1 == 0 || config.N2 == 0) {
    throw Error(Errc::InvalidArgument, "batch sizes must be at least 1");
  }
  if (!(config.p > 0.0 && config.p <= 1.0)) {
    throw Error(Errc::InvalidArgument, "p must lie in (0, 1]");
  }
  RandomStream branches = root_streams(config.seed).child("branches").stream();
  auto estimate = [&](std::size_t t, const std::vector<IterationRecord>& records) {
    const StreamFactory draws = outcome_streams(config.seed, t);
    if (t == 0) {
      EstimatorSample s = batch_gradient(env, records[0].theta, config.N1, draws,
                                         options.workers);
      s.branch = Branch::Full;
      return s;
    }
    return page_update(env, records[t].theta, records[t - 1].theta, *records[t - 1].estimator,
                       config.N1, config.N2, config.p, draws, branches, options.workers);
  };
  return drive(env, reg, config.eta, config.T, config.seed, theta0, options, true, estimate);
}

Stationarity measure_stationarity(const Environment& env, const Regularizer& reg,
                                  const Vector& theta, double eta,
                                  std::optional<std::size_t> monte_carlo_samples,
                                  std::uint64_t seed) {
  Vector grad;
  if (monte_carlo_samples) {
    grad = batch_gradient(env, theta, *monte_carlo_samples,
                          StreamFactory(seed).child("stationarity"))
               .grad;
  } else {
    grad = exact_gradient(env, theta);
  }
  return {reg.subdiff_dist(theta, grad), gradient_mapping(theta, grad, eta, reg).norm()};
}

std::vector<Vector> proximal_gradient_ascent(const Environment& env, const Regularizer& reg,
                                             const Vector& theta0, double eta,
                                             std::size_t iterations) {
  std::vector<Vector> path{theta0};
  path.reserve(iterations + 1);
  for (std::size_t t = 0; t < iterations; ++t) {
    const Vector& cur = path.back();
    Vector next = reg.prox(cur + eta * exact_gradient(env, cur), eta);
    check_iterate(next, t + 1);
    path.push_back(std::move(next));
  }
  return path;
}

double default_delta(const Environment& env, const Regularizer& reg, const Vector& theta0) {
  const double g = reg.value(theta0);
  return env.constants().reward_bound + std::max(0.0, g) - composite_value(env, reg, theta0);
}

}  // namespace proxpg
