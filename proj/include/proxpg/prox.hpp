#ifndef PROXPG_PROX_HPP_
#define PROXPG_PROX_HPP_

#include <memory>
#include <string>

#include "proxpg/core.hpp"

namespace proxpg {

/// Closed proper convex G with an exact proximal operator and an exact
/// projection onto its subdifferential.
class Regularizer {
 public:
  virtual ~Regularizer() = default;

  virtual std::string name() const = 0;

  /// G(theta); +infinity off the domain of an indicator.
  virtual double value(const Vector& theta) const = 0;

  /// argmin_y { G(y) + ||y - v||^2 / (2 eta) }.
  Vector prox(const Vector& v, double eta) const;

  /// Euclidean projection of g onto the subdifferential of G at theta.
  /// Throws InfeasiblePoint when G(theta) is +infinity.
  Vector project_subdifferential(const Vector& theta, const Vector& g) const;

  /// dist(g, subdifferential of G at theta).
  double subdiff_dist(const Vector& theta, const Vector& g) const;

  virtual bool is_indicator() const { return false; }

 protected:
  virtual Vector prox_impl(const Vector& v, double eta) const = 0;
  virtual Vector project_subdifferential_impl(const Vector& theta,
                                              const Vector& g) const = 0;
};

class ZeroReg final : public Regularizer {
 public:
  std::string name() const override { return "zero"; }
  double value(const Vector& theta) const override;

 protected:
  Vector prox_impl(const Vector& v, double eta) const override;
  Vector project_subdifferential_impl(const Vector& theta,
                                      const Vector& g) const override;
};

/// (lambda / 2) ||theta||^2
class ScaledSquaredNorm final : public Regularizer {
 public:
  explicit ScaledSquaredNorm(double lambda);
  std::string name() const override { return "l2"; }
  double lambda() const { return lambda_; }
  double value(const Vector& theta) const override;

 protected:
  Vector prox_impl(const Vector& v, double eta) const override;
  Vector project_subdifferential_impl(const Vector& theta,
                                      const Vector& g) const override;

 private:
  double lambda_;
};

/// lambda ||theta||_1
class L1 final : public Regularizer {
 public:
  explicit L1(double lambda);
  std::string name() const override { return "l1"; }
  double lambda() const { return lambda_; }
  double value(const Vector& theta) const override;

 protected:
  Vector prox_impl(const Vector& v, double eta) const override;
  Vector project_subdifferential_impl(const Vector& theta,
                                      const Vector& g) const override;

 private:
  double lambda_;
};

/// Indicator of the box [lower, upper]^n.
class BoxIndicator final : public Regularizer {
 public:
  BoxIndicator(double lower, double upper);
  std::string name() const override { return "box"; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double value(const Vector& theta) const override;
  bool is_indicator() const override { return true; }

 protected:
  Vector prox_impl(const Vector& v, double eta) const override;
  Vector project_subdifferential_impl(const Vector& theta,
                                      const Vector& g) const override;

 private:
  double lower_;
  double upper_;
};

/// Indicator of { theta : sum theta = 1, theta_k >= floor } in R^n. A zero
/// floor gives the probability simplex.
class LowerBoundedSimplexIndicator : public Regularizer {
 public:
  LowerBoundedSimplexIndicator(Eigen::Index dim, double floor);
  std::string name() const override { return "lower_bounded_simplex"; }
  Eigen::Index dim() const { return dim_; }
  double floor() const { return floor_; }
  double value(const Vector& theta) const override;
  bool is_indicator() const override { return true; }

 protected:
  Vector prox_impl(const Vector& v, double eta) const override;
  Vector project_subdifferential_impl(const Vector& theta,
                                      const Vector& g) const override;

 private:
  Eigen::Index dim_;
  double floor_;
};

class SimplexIndicator final : public LowerBoundedSimplexIndicator {
 public:
  explicit SimplexIndicator(Eigen::Index dim) : LowerBoundedSimplexIndicator(dim, 0.0) {}
  std::string name() const override { return "simplex"; }
};

/// Euclidean projection of v onto { z >= 0, sum z = radius } by the
/// sort-and-threshold rule, keeping the largest valid support.
Vector project_scaled_simplex(const Vector& v, double radius);

/// G_eta(theta) = (prox(theta + eta g, eta) - theta) / eta.
Vector gradient_mapping(const Vector& theta, const Vector& g, double eta,
                        const Regularizer& reg);

}  // namespace proxpg

#endif  // PROXPG_PROX_HPP_
