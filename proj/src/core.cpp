#include "proxpg/core.hpp"

#include <cmath>
#include <limits>

#include "proxpg/error.hpp"
#include "proxpg/prox.hpp"

namespace proxpg {

bool all_finite(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

ParamVector::ParamVector(Vector values) : values_(std::move(values)) {
  if (!all_finite(values_)) {
    throw Error(Errc::NumericalDivergence, "parameter vector has a non-finite entry");
  }
}

void TheoryConstants::validate() const {
  const double fields[] = {reward_bound, score_bound, score_hessian_bound,
                           reward_grad_bound, reward_hessian_bound};
  for (double f : fields) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      throw Error(Errc::InvalidArgument, "declared bounds must be finite and nonnegative");
    }
  }
  if (weight_bound && (!(*weight_bound >= 0.0) || !std::isfinite(*weight_bound))) {
    throw Error(Errc::InvalidArgument, "weight bound must be finite and nonnegative");
  }
}

void Environment::score_gradient(const Vector& theta, const Outcome& x,
                                 Eigen::Ref<Vector> out) const {
  out = reward(theta, x) * grad_log_prob(theta, x) + grad_reward(theta, x);
}

std::span<const Outcome> Environment::outcomes() const {
  throw Error(Errc::NotEnumerable, name() + " has no finite outcome space");
}

Vector Environment::random_point(RandomStream& rng) const {
  Vector theta(dim());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = -3.0 + 6.0 * rng.uniform();
  return theta;
}

bool Environment::in_domain(const Vector& theta) const {
  return theta.size() == dim() && all_finite(theta);
}

namespace {

void require_enumerable(const Environment& env) {
  if (!env.enumerable()) {
    throw Error(Errc::NotEnumerable, env.name() + " has no finite outcome space");
  }
}

}  // namespace

Vector enumerated_probabilities(const Environment& env, const Vector& theta) {
  require_enumerable(env);
  const auto space = env.outcomes();
  Vector probs(static_cast<Eigen::Index>(space.size()));
  for (std::size_t i = 0; i < space.size(); ++i) {
    probs[static_cast<Eigen::Index>(i)] = std::exp(env.log_prob(theta, space[i]));
  }
  return probs;
}

Vector exact_gradient(const Environment& env, const Vector& theta) {
  require_enumerable(env);
  Vector grad = Vector::Zero(env.dim());
  for (const Outcome& x : env.outcomes()) {
    const double p = std::exp(env.log_prob(theta, x));
    if (p == 0.0) continue;
    grad += p * (env.reward(theta, x) * env.grad_log_prob(theta, x) +
                 env.grad_reward(theta, x));
  }
  return grad;
}

double exact_objective(const Environment& env, const Vector& theta) {
  require_enumerable(env);
  double total = 0.0;
  for (const Outcome& x : env.outcomes()) {
    const double p = std::exp(env.log_prob(theta, x));
    if (p == 0.0) continue;
    total += p * env.reward(theta, x);
  }
  return total;
}

double composite_value(const Environment& env, const Regularizer& reg,
                       const Vector& theta) {
  const double g = reg.value(theta);
  if (g == std::numeric_limits<double>::infinity()) {
    require_enumerable(env);
    return -std::numeric_limits<double>::infinity();
  }
  return exact_objective(env, theta) - g;
}

}  // namespace proxpg
