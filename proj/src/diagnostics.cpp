#include "proxpg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "proxpg/error.hpp"
#include "proxpg/estimators.hpp"

namespace proxpg {

namespace {

using nlohmann::json;

json to_json_vector(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

bool within(double observed, double bound) {
  return observed <= bound + 1e-12 * std::max(1.0, std::abs(bound));
}

void require_enumerable(const Environment& env) {
  if (!env.enumerable()) {
    throw Error(Errc::NotEnumerable, env.name() + " has no finite outcome space");
  }
}

double importance_weight(const Environment& env, const Vector& theta,
                         const Vector& theta_prime, const Outcome& x) {
  return std::exp(env.log_prob(theta, x) - env.log_prob(theta_prime, x));
}

}  // namespace

json Report::to_json() const {
  json j;
  j["name"] = name;
  j["inputs"] = inputs;
  j["values"] = values;
  j["bands"] = bands;
  j["pass"] = pass ? json(*pass) : json(nullptr);
  j["assertion"] = assertion;
  return j;
}

RunningMoments::RunningMoments(Eigen::Index dim)
    : mean_(Vector::Zero(dim)), m2_(Vector::Zero(dim)) {}

void RunningMoments::add(const Vector& x) {
  ++count_;
  const Vector delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta.cwiseProduct(x - mean_);
}

Vector RunningMoments::variance() const {
  if (count_ < 2) throw Error(Errc::InvalidArgument, "variance needs at least two samples");
  return m2_ / static_cast<double>(count_ - 1);
}

double RunningMoments::trace_variance() const { return variance().sum(); }

Report check_unbiasedness(const Environment& env, const Vector& theta, std::size_t m,
                          double z, std::uint64_t seed) {
  require_enumerable(env);
  if (m == 0) throw Error(Errc::InvalidArgument, "need at least one draw");
  const StreamFactory draws = StreamFactory(seed).child("unbiasedness");
  RunningMoments moments(env.dim());
  for (std::size_t j = 0; j < m; ++j) {
    RandomStream rng = draws.stream(j);
    moments.add(score_gradient(env, theta, env.sample(theta, rng)));
  }
  const Vector target = exact_gradient(env, theta);

  Report r;
  r.name = "unbiasedness";
  r.inputs = {{"env", env.name()}, {"theta", to_json_vector(theta)}, {"M", m}, {"z", z},
              {"seed", seed}};
  r.values = {{"empirical_mean", to_json_vector(moments.mean())},
              {"exact", to_json_vector(target)}};
  if (m < 2) {
    r.bands = {{"half_width", "undefined"}};
    r.pass = std::nullopt;
    return r;
  }
  const Vector half = z * (moments.variance() / static_cast<double>(m)).cwiseSqrt();
  r.bands = {{"half_width", to_json_vector(half)}};
  bool ok = true;
  for (Eigen::Index i = 0; i < half.size(); ++i) {
    ok = ok && std::abs(moments.mean()[i] - target[i]) <= half[i];
  }
  r.pass = ok;
  return r;
}

WeightVariance weight_variance(const Environment& env, const Vector& theta,
                               const Vector& theta_prime, std::size_t m, std::uint64_t seed) {
  WeightVariance out;
  if (env.enumerable()) {
    double total = 0.0;
    for (const Outcome& x : env.outcomes()) {
      const double p = std::exp(env.log_prob(theta_prime, x));
      if (p == 0.0) continue;
      const double w = importance_weight(env, theta, theta_prime, x);
      total += p * (w - 1.0) * (w - 1.0);
    }
    out.exact = total;
  }
  if (m > 0) {
    const StreamFactory draws = StreamFactory(seed).child("weights");
    double mean = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      RandomStream rng = draws.stream(j);
      const double w = importance_weight(env, theta, theta_prime, env.sample(theta_prime, rng));
      mean += ((w - 1.0) * (w - 1.0) - mean) / static_cast<double>(j + 1);
    }
    out.empirical = mean;
    out.samples = m;
  }
  if (const auto cw = env.constants().weight_bound) {
    out.declared = *cw * *cw;
    out.violation = !within(out.exact.value_or(out.empirical), *out.declared);
  }
  return out;
}

Lemma3Gap lemma3_gap(const Environment& env, const Vector& theta, const Vector& theta_prime) {
  require_enumerable(env);
  const double C = page_C(env.constants());
  Lemma3Gap gap;
  for (const Outcome& x : env.outcomes()) {
    const double p = std::exp(env.log_prob(theta_prime, x));
    if (p == 0.0) continue;
    const Vector diff = score_gradient(env, theta_prime, x) -
                        weighted_score_gradient(env, theta, theta_prime, x);
    gap.lhs += p * diff.squaredNorm();
  }
  gap.rhs = C * (theta - theta_prime).squaredNorm();
  return gap;
}

double smoothness_probe(const Environment& env, std::size_t pairs, std::uint64_t seed) {
  if (pairs == 0) throw Error(Errc::EmptyProbe, "smoothness probe needs at least one pair");
  require_enumerable(env);
  RandomStream rng = StreamFactory(seed).child("smoothness").stream();
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const Vector a = env.random_point(rng);
    const Vector b = env.random_point(rng);
    const double dist = (a - b).norm();
    if (dist == 0.0) continue;
    worst = std::max(worst, (exact_gradient(env, a) - exact_gradient(env, b)).norm() / dist);
  }
  return worst;
}

VarianceReduction variance_reduction_report(const RunTrace& spg, const RunTrace& page,
                                            std::size_t from, std::size_t to) {
  if (spg.records.empty() || page.records.empty() ||
      spg.records[0].theta != page.records[0].theta) {
    throw Error(Errc::MismatchedTraces, "traces do not share an initial point");
  }
  if (from >= to) throw Error(Errc::InvalidArgument, "empty iteration window");
  auto collect = [&](const RunTrace& trace, std::vector<double>& out) {
    for (std::size_t t = from; t < to; ++t) {
      if (t >= trace.records.size() || !trace.records[t].estimator_error) {
        throw Error(Errc::MismatchedTraces,
                    "trace lacks an exact estimator error at iteration " + std::to_string(t));
      }
      out.push_back(*trace.records[t].estimator_error);
    }
  };
  VarianceReduction vr;
  collect(spg, vr.spg_errors);
  collect(page, vr.page_errors);
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  vr.spg_mean = mean(vr.spg_errors);
  vr.page_mean = mean(vr.page_errors);
  vr.ratio = vr.page_mean / vr.spg_mean;
  return vr;
}

ErrorSumBound error_sum_bound_from_trace(const RunTrace& page, const PageConfig& config,
                              const DerivedConstants& dc, double delta) {
  double sum = 0.0;
  for (std::size_t t = 0; t < config.T; ++t) {
    if (t >= page.records.size() || !page.records[t].estimator_error) {
      throw Error(Errc::MismatchedTraces, "trace lacks exact estimator errors");
    }
    sum += *page.records[t].estimator_error;
  }
  return error_sum_bound(sum, config.p, config.N1, config.N2, config.eta, dc.L, dc.require_C(),
                      dc.sigma_sq, config.T, delta);
}

Report falsify_declared_bounds(const Environment& env, std::size_t probes,
                               std::uint64_t seed) {
  const TheoryConstants tc = env.constants();
  RandomStream rng = StreamFactory(seed).child("bounds").stream();
  double max_reward = 0.0;
  double max_score = 0.0;
  double max_reward_grad = 0.0;
  for (std::size_t i = 0; i < probes; ++i) {
    const Vector theta = env.random_point(rng);
    const Outcome x = env.sample(theta, rng);
    max_reward = std::max(max_reward, std::abs(env.reward(theta, x)));
    max_score = std::max(max_score, env.grad_log_prob(theta, x).norm());
    max_reward_grad = std::max(max_reward_grad, env.grad_reward(theta, x).norm());
  }
  Report r;
  r.name = "declared_bounds";
  r.inputs = {{"env", env.name()}, {"probes", probes}, {"seed", seed}};
  r.values = {{"max_reward", max_reward},
              {"max_score_norm", max_score},
              {"max_reward_grad_norm", max_reward_grad}};
  r.bands = {{"U", tc.reward_bound},
             {"C_g", tc.score_bound},
             {"C~_g", tc.reward_grad_bound}};
  r.pass = within(max_reward, tc.reward_bound) && within(max_score, tc.score_bound) &&
           within(max_reward_grad, tc.reward_grad_bound);
  return r;
}

Report finite_difference_check(const Environment& env, std::size_t probes, double step,
                               double tolerance, std::uint64_t seed) {
  require_enumerable(env);
  RandomStream rng = StreamFactory(seed).child("finite_difference").stream();
  double worst = 0.0;
  for (std::size_t i = 0; i < probes; ++i) {
    const Vector theta = env.random_point(rng);
    const Vector g = exact_gradient(env, theta);
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Vector up = theta;
      Vector down = theta;
      up[k] += step;
      down[k] -= step;
      const double fd = (exact_objective(env, up) - exact_objective(env, down)) / (2.0 * step);
      worst = std::max(worst, std::abs(fd - g[k]) / std::max(std::abs(g[k]), 1e-4));
    }
  }
  Report r;
  r.name = "finite_difference";
  r.inputs = {{"env", env.name()}, {"probes", probes}, {"step", step}, {"seed", seed}};
  r.values = {{"max_relative_error", worst}};
  r.bands = {{"tolerance", tolerance}};
  r.pass = worst <= tolerance;
  return r;
}

Report probability_sum_check(const Environment& env, std::size_t probes, double tolerance,
                             std::uint64_t seed) {
  require_enumerable(env);
  RandomStream rng = StreamFactory(seed).child("probability_sum").stream();
  double worst = 0.0;
  for (std::size_t i = 0; i < probes; ++i) {
    const Vector theta = env.random_point(rng);
    worst = std::max(worst, std::abs(enumerated_probabilities(env, theta).sum() - 1.0));
  }
  Report r;
  r.name = "probability_sum";
  r.inputs = {{"env", env.name()}, {"probes", probes}, {"seed", seed}};
  r.values = {{"max_abs_deviation", worst}};
  r.bands = {{"tolerance", tolerance}};
  r.pass = worst <= tolerance;
  return r;
}

Report variance_bound_check(const Environment& env, const Vector& theta, std::size_t m,
                            std::uint64_t seed) {
  const StreamFactory draws = StreamFactory(seed).child("variance");
  RunningMoments moments(env.dim());
  for (std::size_t j = 0; j < m; ++j) {
    RandomStream rng = draws.stream(j);
    moments.add(score_gradient(env, theta, env.sample(theta, rng)));
  }
  const double bound = sigma_sq(env.constants());
  const double observed = moments.trace_variance();
  Report r;
  r.name = "variance_bound";
  r.inputs = {{"env", env.name()}, {"theta", to_json_vector(theta)}, {"M", m}, {"seed", seed}};
  r.values = {{"empirical_variance", observed}};
  r.bands = {{"sigma_sq", bound}};
  r.pass = within(observed, bound);
  return r;
}

double empirical_sigma_sq(const Environment& env, std::size_t probes, std::uint64_t seed) {
  require_enumerable(env);
  RandomStream rng = StreamFactory(seed).child("empirical_sigma").stream();
  double worst = 0.0;
  for (std::size_t i = 0; i < probes; ++i) {
    const Vector theta = env.random_point(rng);
    const Vector mean = exact_gradient(env, theta);
    double var = 0.0;
    for (const Outcome& x : env.outcomes()) {
      const double p = std::exp(env.log_prob(theta, x));
      if (p == 0.0) continue;
      var += p * (score_gradient(env, theta, x) - mean).squaredNorm();
    }
    worst = std::max(worst, var);
  }
  return worst;
}

std::vector<Report> run_battery(const Environment& env, std::uint64_t seed) {
  std::vector<Report> reports;
  reports.push_back(falsify_declared_bounds(env, 10000, seed));

  RandomStream rng = StreamFactory(seed).child("battery").stream();
  const Vector probe = env.random_point(rng);
  reports.push_back(variance_bound_check(env, probe, 100000, seed));
  if (!env.enumerable()) return reports;

  reports.push_back(probability_sum_check(env, 100, 1e-10, seed));
  reports.push_back(finite_difference_check(env, 20, 1e-5, 1e-5, seed));
  reports.push_back(check_unbiasedness(env, probe, 100000, 4.0, seed));

  {
    const double L = lipschitz_L(env.constants());
    const double ratio = smoothness_probe(env, 1000, seed);
    Report r;
    r.name = "smoothness";
    r.inputs = {{"env", env.name()}, {"pairs", 1000}, {"seed", seed}};
    r.values = {{"max_ratio", ratio}};
    r.bands = {{"L", L}};
    r.pass = within(ratio, L);
    reports.push_back(std::move(r));
  }

  if (env.constants().weight_bound) {
    double worst_weight = 0.0;
    double worst_ratio = 0.0;
    bool weights_ok = true;
    bool gap_ok = true;
    for (int i = 0; i < 100; ++i) {
      const Vector a = env.random_point(rng);
      const Vector b = env.random_point(rng);
      const WeightVariance wv = weight_variance(env, a, b, 0);
      worst_weight = std::max(worst_weight, *wv.exact);
      weights_ok = weights_ok && !wv.violation;
      const Lemma3Gap gap = lemma3_gap(env, a, b);
      if (gap.rhs > 0.0) worst_ratio = std::max(worst_ratio, gap.lhs / gap.rhs);
      gap_ok = gap_ok && within(gap.lhs, gap.rhs);
    }
    const double cw = *env.constants().weight_bound;
    Report w;
    w.name = "weight_variance";
    w.inputs = {{"env", env.name()}, {"pairs", 100}, {"seed", seed}};
    w.values = {{"max_exact", worst_weight}};
    w.bands = {{"C_w^2", cw * cw}};
    w.pass = weights_ok;
    reports.push_back(std::move(w));

    Report l3;
    l3.name = "importance_sampling_gap";
    l3.inputs = {{"env", env.name()}, {"pairs", 100}, {"seed", seed}};
    l3.values = {{"max_lhs_over_rhs", worst_ratio}};
    l3.bands = {{"C", page_C(env.constants())}};
    l3.pass = gap_ok;
    reports.push_back(std::move(l3));
  }
  return reports;
}

}  // namespace proxpg
