#ifndef PROXPG_ESTIMATORS_HPP_
#define PROXPG_ESTIMATORS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "proxpg/core.hpp"

namespace proxpg {

enum class Branch { Full, Incremental };

std::string_view branch_name(Branch b);

struct EstimatorSample {
  Vector grad;
  std::size_t samples_used = 0;
  std::optional<Branch> branch;
};

/// g(x, theta) = R_theta(x) grad log pi_theta(x) + grad R_theta(x).
Vector score_gradient(const Environment& env, const Vector& theta, const Outcome& x);

/// (pi_theta(x) / pi_theta'(x)) g(x, theta), the weight formed in log space.
/// A weight above `clip` is truncated to `clip`; this biases the estimate and
/// is meant for diagnostics only. Throws ZeroDensity when pi_theta'(x) = 0.
Vector weighted_score_gradient(const Environment& env, const Vector& theta,
                               const Vector& theta_prime, const Outcome& x,
                               std::optional<double> clip = std::nullopt);

/// Mean of g(x_j, theta) over N draws x_j ~ pi_theta. Draw j uses
/// draws.stream(j), and the mean is accumulated in fixed-size chunks combined
/// pairwise, so the result is bitwise independent of `workers`.
EstimatorSample batch_gradient(const Environment& env, const Vector& theta,
                               std::size_t n, const StreamFactory& draws,
                               unsigned workers = 1);

/// Deterministic batch mean over the given outcomes.
Vector batch_gradient_from(const Environment& env, const Vector& theta,
                           std::span<const Outcome> xs);

/// g_old + (1/N) sum_j [g(x_j, theta_new) - g_w(x_j, theta_old, theta_new)]
/// over the given outcomes, which are understood as draws from pi_theta_new.
Vector incremental_from(const Environment& env, const Vector& theta_new,
                        const Vector& theta_old, const Vector& g_old,
                        std::span<const Outcome> xs);

/// One PAGE step. A uniform from `branch_rng` below p selects a fresh batch
/// of N1 draws at theta_new; otherwise g_old is corrected with N2 shared
/// draws from pi_theta_new. Outcome draws come from `draws` only.
EstimatorSample page_update(const Environment& env, const Vector& theta_new,
                            const Vector& theta_old, const Vector& g_old,
                            std::size_t n1, std::size_t n2, double p,
                            const StreamFactory& draws, RandomStream& branch_rng,
                            unsigned workers = 1);

}  // namespace proxpg

#endif  // PROXPG_ESTIMATORS_HPP_
