#ifndef PROXPG_CORE_HPP_
#define PROXPG_CORE_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proxpg/rng.hpp"

namespace proxpg {

using Vector = Eigen::VectorXd;

/// Decision variable. Construction rejects non-finite entries, so every
/// stored ParamVector is finite.
class ParamVector {
 public:
  explicit ParamVector(Vector values);

  static ParamVector zeros(Eigen::Index n) { return ParamVector(Vector::Zero(n)); }

  const Vector& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

  friend bool operator==(const ParamVector& a, const ParamVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Vector values_;
};

bool all_finite(const Vector& v);

/// An element of an environment's outcome space: an arm index, a flattened
/// trajectory (s0, a0, s1, a1, ..., sH), or any other integer encoding the
/// environment chooses.
struct Outcome {
  std::vector<int> codes;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Declared regularity bounds of an environment.
///   reward_bound          U    : |R_theta(x)| <= U
///   score_bound           C_g  : ||grad log pi_theta(x)|| <= C_g
///   score_hessian_bound   C_h  : ||hess log pi_theta(x)||_2 <= C_h
///   reward_grad_bound     C~_g : ||grad R_theta(x)|| <= C~_g
///   reward_hessian_bound  C~_h : ||hess R_theta(x)||_2 <= C~_h
///   weight_bound          C_w  : E_{theta'}[(pi_theta/pi_theta' - 1)^2] <= C_w^2
/// weight_bound is present only when the environment claims bounded
/// importance weights.
struct TheoryConstants {
  double reward_bound = 0.0;
  double score_bound = 0.0;
  double score_hessian_bound = 0.0;
  double reward_grad_bound = 0.0;
  double reward_hessian_bound = 0.0;
  std::optional<double> weight_bound;

  void validate() const;

  friend bool operator==(const TheoryConstants&, const TheoryConstants&) = default;
};

/// A parameterized sampling distribution pi_theta paired with a (possibly
/// theta-dependent) reward R_theta. Implementations are immutable after
/// construction and every method is reentrant; randomness comes only from
/// the stream argument.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual Eigen::Index dim() const = 0;

  virtual Outcome sample(const Vector& theta, RandomStream& rng) const = 0;
  virtual double log_prob(const Vector& theta, const Outcome& x) const = 0;
  virtual Vector grad_log_prob(const Vector& theta, const Outcome& x) const = 0;
  virtual double reward(const Vector& theta, const Outcome& x) const = 0;
  virtual Vector grad_reward(const Vector& theta, const Outcome& x) const = 0;

  /// Per-outcome gradient estimator g(x, theta), written into out. The
  /// default is R_theta(x) grad log pi_theta(x) + grad R_theta(x).
  virtual void score_gradient(const Vector& theta, const Outcome& x,
                              Eigen::Ref<Vector> out) const;

  virtual bool enumerable() const { return false; }
  /// The full finite outcome space. Throws NotEnumerable by default.
  virtual std::span<const Outcome> outcomes() const;

  virtual TheoryConstants constants() const = 0;

  /// Random probe point from the environment's natural domain; uniform on
  /// [-3, 3]^n unless overridden.
  virtual Vector random_point(RandomStream& rng) const;

  /// Whether theta lies in the domain where the declared constants apply.
  virtual bool in_domain(const Vector& theta) const;
};

/// pi_theta(x) for every enumerated outcome, in outcomes() order.
Vector enumerated_probabilities(const Environment& env, const Vector& theta);

/// grad J(theta) = sum_x pi_theta(x) [R_theta(x) grad log pi_theta(x) + grad R_theta(x)].
Vector exact_gradient(const Environment& env, const Vector& theta);

/// J(theta) = sum_x pi_theta(x) R_theta(x).
double exact_objective(const Environment& env, const Vector& theta);

class Regularizer;

/// F(theta) = J(theta) - G(theta); -infinity where G is +infinity.
double composite_value(const Environment& env, const Regularizer& reg,
                       const Vector& theta);

}  // namespace proxpg

#endif  // PROXPG_CORE_HPP_
