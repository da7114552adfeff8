#include "proxpg/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "proxpg/error.hpp"

namespace proxpg {

namespace {

constexpr std::size_t kChunk = 4096;

// Per-index term of a batch mean, written into `out`.
using Term = std::function<void(std::size_t, Eigen::Ref<Vector>)>;

Vector pairwise_total(std::vector<Vector>& parts) {
  while (parts.size() > 1) {
    std::vector<Vector> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(parts[i] + parts[i + 1]);
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

// Mean of term(0..n-1) computed as t_0 + sum_j (t_j - t_0) / n. The shift
// makes constant terms exact and keeps the accumulation well conditioned.
Vector shifted_mean(Eigen::Index dim, std::size_t n, const Term& term, unsigned workers) {
  Vector first(dim);
  term(0, first);
  if (n == 1) return first;

  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Vector> partial(chunks, Vector::Zero(dim));
  auto run_chunk = [&](std::size_t c) {
    Vector scratch(dim);
    Vector& acc = partial[c];
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t j = std::max<std::size_t>(c * kChunk, 1); j < end; ++j) {
      term(j, scratch);
      acc += scratch - first;
    }
  };

  const unsigned pool = std::min<std::size_t>(std::max(workers, 1u), chunks);
  if (pool <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(pool);
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < pool; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return first + pairwise_total(partial) / static_cast<double>(n);
}

void require_finite_estimate(const Vector& g) {
  if (!all_finite(g)) {
    throw Error(Errc::NumericalDivergence, "gradient estimate has a non-finite entry");
  }
}

}  // namespace

std::string_view branch_name(Branch b) {
  return b == Branch::Full ? "full" : "incremental";
}

Vector score_gradient(const Environment& env, const Vector& theta, const Outcome& x) {
  Vector out(env.dim());
  env.score_gradient(theta, x, out);
  return out;
}

Vector weighted_score_gradient(const Environment& env, const Vector& theta,
                               const Vector& theta_prime, const Outcome& x,
                               std::optional<double> clip) {
  const double lp_prime = env.log_prob(theta_prime, x);
  if (lp_prime == -std::numeric_limits<double>::infinity()) {
    throw Error(Errc::ZeroDensity, "outcome has zero density under the sampling parameter");
  }
  const double lp = env.log_prob(theta, x);
  if (lp == -std::numeric_limits<double>::infinity()) return Vector::Zero(env.dim());
  double w = std::exp(lp - lp_prime);
  if (clip) w = std::min(w, *clip);
  return w * score_gradient(env, theta, x);
}

EstimatorSample batch_gradient(const Environment& env, const Vector& theta,
                               std::size_t n, const StreamFactory& draws,
                               unsigned workers) {
  if (n == 0) throw Error(Errc::InvalidArgument, "batch size must be at least 1");
  const Term term = [&](std::size_t j, Eigen::Ref<Vector> out) {
    RandomStream rng = draws.stream(j);
    env.score_gradient(theta, env.sample(theta, rng), out);
  };
  EstimatorSample s{shifted_mean(env.dim(), n, term, workers), n, std::nullopt};
  require_finite_estimate(s.grad);
  return s;
}

Vector batch_gradient_from(const Environment& env, const Vector& theta,
                           std::span<const Outcome> xs) {
  if (xs.empty()) throw Error(Errc::InvalidArgument, "batch must contain an outcome");
  const Term term = [&](std::size_t j, Eigen::Ref<Vector> out) {
    env.score_gradient(theta, xs[j], out);
  };
  return shifted_mean(env.dim(), xs.size(), term, 1);
}

namespace {

void correction_term(const Environment& env, const Vector& theta_new,
                     const Vector& theta_old, const Outcome& x, Eigen::Ref<Vector> out) {
  env.score_gradient(theta_new, x, out);
  out -= weighted_score_gradient(env, theta_old, theta_new, x);
}

}  // namespace

Vector incremental_from(const Environment& env, const Vector& theta_new,
                        const Vector& theta_old, const Vector& g_old,
                        std::span<const Outcome> xs) {
  if (xs.empty()) throw Error(Errc::InvalidArgument, "batch must contain an outcome");
  const Term term = [&](std::size_t j, Eigen::Ref<Vector> out) {
    correction_term(env, theta_new, theta_old, xs[j], out);
  };
  return g_old + shifted_mean(env.dim(), xs.size(), term, 1);
}

EstimatorSample page_update(const Environment& env, const Vector& theta_new,
                            const Vector& theta_old, const Vector& g_old,
                            std::size_t n1, std::size_t n2, double p,
                            const StreamFactory& draws, RandomStream& branch_rng,
                            unsigned workers) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(Errc::InvalidArgument, "p must lie in (0, 1]");
  if (n1 == 0 || n2 == 0) throw Error(Errc::InvalidArgument, "batch sizes must be at least 1");
  if (branch_rng.uniform() < p) {
    EstimatorSample s = batch_gradient(env, theta_new, n1, draws, workers);
    s.branch = Branch::Full;
    return s;
  }
  const Term term = [&](std::size_t j, Eigen::Ref<Vector> out) {
    RandomStream rng = draws.stream(j);
    correction_term(env, theta_new, theta_old, env.sample(theta_new, rng), out);
  };
  EstimatorSample s{g_old + shifted_mean(env.dim(), n2, term, workers), n2,
                    Branch::Incremental};
  require_finite_estimate(s.grad);
  return s;
}

}  // namespace proxpg
