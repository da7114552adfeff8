#ifndef PROXPG_ENVIRONMENTS_HPP_
#define PROXPG_ENVIRONMENTS_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "proxpg/core.hpp"

namespace proxpg {

/// Numerically stable softmax of a contiguous block.
Vector softmax(const Eigen::Ref<const Vector>& logits);

/// Inverse-CDF draw from a probability vector (need not be normalized).
int sample_categorical(const Eigen::Ref<const Vector>& probs, RandomStream& rng);

/// K-armed bandit with a softmax policy over logits theta and fixed
/// rewards r.
///
/// Declared bounds: U = max|r|, C_g = sqrt(2), C_h = 2, C~_g = C~_h = 0.
/// With a box radius B the natural domain becomes [-B, B]^K and the
/// importance weights are bounded by exp(4B), so C_w^2 = exp(4B) - 1 is
/// declared as well.
class SoftmaxBandit : public Environment {
 public:
  explicit SoftmaxBandit(std::vector<double> rewards,
                         std::optional<double> box_radius = std::nullopt);

  std::string name() const override { return "softmax_bandit"; }
  Eigen::Index dim() const override { return static_cast<Eigen::Index>(rewards_.size()); }

  Outcome sample(const Vector& theta, RandomStream& rng) const override;
  double log_prob(const Vector& theta, const Outcome& x) const override;
  Vector grad_log_prob(const Vector& theta, const Outcome& x) const override;
  double reward(const Vector& theta, const Outcome& x) const override;
  Vector grad_reward(const Vector& theta, const Outcome& x) const override;
  void score_gradient(const Vector& theta, const Outcome& x,
                      Eigen::Ref<Vector> out) const override;

  bool enumerable() const override { return true; }
  std::span<const Outcome> outcomes() const override { return arms_; }
  TheoryConstants constants() const override;
  Vector random_point(RandomStream& rng) const override;
  bool in_domain(const Vector& theta) const override;

  const std::vector<double>& rewards() const { return rewards_; }
  std::optional<double> box_radius() const { return box_radius_; }

 protected:
  int arm(const Outcome& x) const;

  std::vector<double> rewards_;
  std::optional<double> box_radius_;
  std::vector<Outcome> arms_;
};

/// Softmax bandit whose reward depends on the parameter:
///   R_theta(a) = r_a (1 + alpha sin(v_a . theta)) / 2.
/// Declared C~_g = (alpha/2) max|r| max||v_a||, C~_h = (alpha/2) max|r| max||v_a||^2.
class ThetaRewardBandit final : public SoftmaxBandit {
 public:
  ThetaRewardBandit(std::vector<double> rewards, double alpha,
                    std::vector<Vector> directions,
                    std::optional<double> box_radius = std::nullopt);

  /// Directions drawn uniformly from [-1, 1]^K with a fixed seed.
  static ThetaRewardBandit with_random_directions(std::vector<double> rewards,
                                                  double alpha, std::uint64_t seed,
                                                  std::optional<double> box_radius = std::nullopt);

  std::string name() const override { return "theta_reward_bandit"; }
  double reward(const Vector& theta, const Outcome& x) const override;
  Vector grad_reward(const Vector& theta, const Outcome& x) const override;
  void score_gradient(const Vector& theta, const Outcome& x,
                      Eigen::Ref<Vector> out) const override;
  TheoryConstants constants() const override;

  double alpha() const { return alpha_; }
  const std::vector<Vector>& directions() const { return directions_; }

 private:
  double alpha_;
  std::vector<Vector> directions_;
};

/// Bandit with the direct parameterization pi_theta(a) = theta_a on the
/// simplex with every coordinate at least `floor`. Declared bounds hold on
/// that set: C_g = 1/floor, C_h = 1/floor^2, C_w^2 = 1/floor - 1.
class DirectBandit final : public Environment {
 public:
  DirectBandit(std::vector<double> rewards, double floor);

  std::string name() const override { return "direct_bandit"; }
  Eigen::Index dim() const override { return static_cast<Eigen::Index>(rewards_.size()); }

  Outcome sample(const Vector& theta, RandomStream& rng) const override;
  double log_prob(const Vector& theta, const Outcome& x) const override;
  Vector grad_log_prob(const Vector& theta, const Outcome& x) const override;
  double reward(const Vector& theta, const Outcome& x) const override;
  Vector grad_reward(const Vector& theta, const Outcome& x) const override;

  bool enumerable() const override { return true; }
  std::span<const Outcome> outcomes() const override { return arms_; }
  TheoryConstants constants() const override;
  Vector random_point(RandomStream& rng) const override;
  bool in_domain(const Vector& theta) const override;

  const std::vector<double>& rewards() const { return rewards_; }
  double floor() const { return floor_; }

 private:
  std::vector<double> rewards_;
  double floor_;
  std::vector<Outcome> arms_;
};

/// Degenerate distribution on a single outcome with a smooth bounded
/// reward R_theta = A exp(-||theta - c||^2 / (2 s^2)). Every estimator is
/// exact here, so optimization reduces to deterministic gradient ascent.
class PointMassEnv final : public Environment {
 public:
  PointMassEnv(Vector center, double amplitude, double width);

  std::string name() const override { return "point_mass"; }
  Eigen::Index dim() const override { return center_.size(); }

  Outcome sample(const Vector& theta, RandomStream& rng) const override;
  double log_prob(const Vector& theta, const Outcome& x) const override;
  Vector grad_log_prob(const Vector& theta, const Outcome& x) const override;
  double reward(const Vector& theta, const Outcome& x) const override;
  Vector grad_reward(const Vector& theta, const Outcome& x) const override;

  bool enumerable() const override { return true; }
  std::span<const Outcome> outcomes() const override { return single_; }
  TheoryConstants constants() const override;

  const Vector& center() const { return center_; }
  double amplitude() const { return amplitude_; }
  double width() const { return width_; }

 private:
  Vector center_;
  double amplitude_;
  double width_;
  std::vector<Outcome> single_;
};

/// Finite-horizon discounted MDP with a per-state softmax policy. The
/// parameter holds one logit per (state, action), index s * |A| + a.
/// Outcomes are trajectories encoded as (s0, a0, s1, a1, ..., s_{H-1}, a_{H-1}, s_H).
class TabularMdp final : public Environment {
 public:
  struct Spec {
    int states = 0;
    int actions = 0;
    /// transitions[s][a][s'] = P(s' | s, a)
    std::vector<std::vector<std::vector<double>>> transitions;
    /// rewards[s][a] in [0, U]
    std::vector<std::vector<double>> rewards;
    std::vector<double> initial;
    double gamma = 0.0;
    int horizon = 1;
    double enumeration_cap = 1e6;
  };

  explicit TabularMdp(Spec spec);

  /// Random instance: Dirichlet(1) transition rows and initial distribution,
  /// rewards uniform on [0, 1].
  static TabularMdp random(int states, int actions, int horizon, double gamma,
                           std::uint64_t seed, double enumeration_cap = 1e6);

  std::string name() const override { return "tabular_mdp"; }
  Eigen::Index dim() const override {
    return static_cast<Eigen::Index>(spec_.states) * spec_.actions;
  }

  Outcome sample(const Vector& theta, RandomStream& rng) const override;
  double log_prob(const Vector& theta, const Outcome& x) const override;
  Vector grad_log_prob(const Vector& theta, const Outcome& x) const override;
  double reward(const Vector& theta, const Outcome& x) const override;
  Vector grad_reward(const Vector& theta, const Outcome& x) const override;

  /// GPOMDP form: sum_t gamma^t R(s_t, a_t) sum_{t' <= t} grad log pi(a_t' | s_t').
  void score_gradient(const Vector& theta, const Outcome& x,
                      Eigen::Ref<Vector> out) const override;

  bool enumerable() const override;
  std::span<const Outcome> outcomes() const override;
  TheoryConstants constants() const override;

  /// prod_t pi(a_t | s_t; theta) / pi(a_t | s_t; theta_prime), computed in
  /// log space. Initial and transition factors cancel.
  double importance_weight(const Vector& theta, const Vector& theta_prime,
                           const Outcome& x) const;

  /// |S|^(H+1) |A|^H, the size of the unpruned trajectory space.
  double trajectory_space_size() const;

  const Spec& spec() const { return spec_; }

 private:
  Vector policy(const Vector& theta, int state) const;
  double log_policy(const Vector& theta, int state, int action) const;
  void build_outcomes();

  Spec spec_;
  std::vector<Outcome> outcomes_;  // filled at construction when enumerable
};

}  // namespace proxpg

#endif  // PROXPG_ENVIRONMENTS_HPP_
