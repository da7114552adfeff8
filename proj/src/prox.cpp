#include "proxpg/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "proxpg/error.hpp"

namespace proxpg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Simplex-type sets are feasible when the coordinate sum matches to this
// absolute tolerance.
constexpr double kSumTolerance = 1e-9;

void require_finite_input(const Vector& v, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw Error(Errc::InvalidArgument, "prox step must be positive and finite");
  }
  if (!all_finite(v)) throw Error(Errc::InvalidArgument, "prox input is not finite");
}

}  // namespace

Vector Regularizer::prox(const Vector& v, double eta) const {
  require_finite_input(v, eta);
  return prox_impl(v, eta);
}

Vector Regularizer::project_subdifferential(const Vector& theta,
                                            const Vector& g) const {
  if (theta.size() != g.size()) {
    throw Error(Errc::InvalidArgument, "subgradient dimension mismatch");
  }
  if (value(theta) == kInf) {
    throw Error(Errc::InfeasiblePoint, name() + " is +inf at the given point");
  }
  return project_subdifferential_impl(theta, g);
}

double Regularizer::subdiff_dist(const Vector& theta, const Vector& g) const {
  return (g - project_subdifferential(theta, g)).norm();
}

// ---------------------------------------------------------------- ZeroReg

double ZeroReg::value(const Vector&) const { return 0.0; }

Vector ZeroReg::prox_impl(const Vector& v, double) const { return v; }

Vector ZeroReg::project_subdifferential_impl(const Vector& theta,
                                             const Vector&) const {
  return Vector::Zero(theta.size());
}

// ------------------------------------------------------ ScaledSquaredNorm

ScaledSquaredNorm::ScaledSquaredNorm(double lambda) : lambda_(lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(Errc::InvalidArgument, "l2 weight must be finite and nonnegative");
  }
}

double ScaledSquaredNorm::value(const Vector& theta) const {
  return 0.5 * lambda_ * theta.squaredNorm();
}

Vector ScaledSquaredNorm::prox_impl(const Vector& v, double eta) const {
  return v / (1.0 + eta * lambda_);
}

Vector ScaledSquaredNorm::project_subdifferential_impl(const Vector& theta,
                                                       const Vector&) const {
  return lambda_ * theta;
}

// --------------------------------------------------------------------- L1

L1::L1(double lambda) : lambda_(lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(Errc::InvalidArgument, "l1 weight must be finite and nonnegative");
  }
}

double L1::value(const Vector& theta) const { return lambda_ * theta.lpNorm<1>(); }

Vector L1::prox_impl(const Vector& v, double eta) const {
  const double t = eta * lambda_;
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - t;
    out[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
  }
  return out;
}

Vector L1::project_subdifferential_impl(const Vector& theta, const Vector& g) const {
  Vector s(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (theta[i] > 0.0) {
      s[i] = lambda_;
    } else if (theta[i] < 0.0) {
      s[i] = -lambda_;
    } else {
      s[i] = std::clamp(g[i], -lambda_, lambda_);
    }
  }
  return s;
}

// ----------------------------------------------------------- BoxIndicator

BoxIndicator::BoxIndicator(double lower, double upper) : lower_(lower), upper_(upper) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw Error(Errc::InfeasibleConstruction, "box lower bound exceeds upper bound");
  }
}

double BoxIndicator::value(const Vector& theta) const {
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= lower_ && theta[i] <= upper_)) return kInf;
  }
  return 0.0;
}

Vector BoxIndicator::prox_impl(const Vector& v, double) const {
  return v.cwiseMax(lower_).cwiseMin(upper_);
}

Vector BoxIndicator::project_subdifferential_impl(const Vector& theta,
                                                  const Vector& g) const {
  // Normal cone of the box, coordinate by coordinate.
  Vector s(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const bool at_upper = theta[i] == upper_;
    const bool at_lower = theta[i] == lower_;
    if (at_upper && at_lower) {
      s[i] = g[i];
    } else if (at_upper) {
      s[i] = std::max(g[i], 0.0);
    } else if (at_lower) {
      s[i] = std::min(g[i], 0.0);
    } else {
      s[i] = 0.0;
    }
  }
  return s;
}

// -------------------------------------------- LowerBoundedSimplexIndicator

Vector project_scaled_simplex(const Vector& v, double radius) {
  const Eigen::Index n = v.size();
  if (radius == 0.0) return Vector::Zero(n);
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += u[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

LowerBoundedSimplexIndicator::LowerBoundedSimplexIndicator(Eigen::Index dim, double floor)
    : dim_(dim), floor_(floor) {
  if (dim <= 0) throw Error(Errc::InvalidArgument, "simplex dimension must be positive");
  if (!(floor >= 0.0) || !std::isfinite(floor)) {
    throw Error(Errc::InvalidArgument, "simplex floor must be finite and nonnegative");
  }
  if (floor * static_cast<double>(dim) > 1.0) {
    throw Error(Errc::InfeasibleConstruction,
                "floor * dim exceeds 1, the lower-bounded simplex is empty");
  }
}

double LowerBoundedSimplexIndicator::value(const Vector& theta) const {
  if (theta.size() != dim_) return kInf;
  if (std::abs(theta.sum() - 1.0) > kSumTolerance) return kInf;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= floor_)) return kInf;
  }
  return 0.0;
}

Vector LowerBoundedSimplexIndicator::prox_impl(const Vector& v, double) const {
  if (v.size() != dim_) throw Error(Errc::InvalidArgument, "simplex dimension mismatch");
  // Points that are feasible to working precision are their own projection;
  // this keeps projection idempotent in floating point.
  const double slack = 4.0 * static_cast<double>(dim_) *
                       std::numeric_limits<double>::epsilon();
  if (v.minCoeff() >= floor_ && std::abs(v.sum() - 1.0) <= slack) return v;
  const double radius = 1.0 - floor_ * static_cast<double>(dim_);
  return (project_scaled_simplex(v.array() - floor_, radius).array() + floor_).matrix();
}

Vector LowerBoundedSimplexIndicator::project_subdifferential_impl(
    const Vector& theta, const Vector& g) const {
  // Normal cone at theta: { mu 1 - nu : nu >= 0, nu_i = 0 where theta_i > floor }.
  // Minimize sum_{free}(g_i - mu)^2 + sum_{active} max(g_i - mu, 0)^2 over mu;
  // the derivative is monotone and piecewise linear in mu.
  std::vector<Eigen::Index> free_idx;
  std::vector<double> active;
  double free_sum = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (theta[i] > floor_) {
      free_idx.push_back(i);
      free_sum += g[i];
    } else {
      active.push_back(g[i]);
    }
  }
  if (free_idx.empty()) return g;  // single-point set, cone is everything
  std::sort(active.begin(), active.end(), std::greater<>());
  double mu = free_sum / static_cast<double>(free_idx.size());
  double running = free_sum;
  for (std::size_t j = 0; j <= active.size(); ++j) {
    // Exactly the top j active values exceed mu on this piece.
    const double candidate = running / static_cast<double>(free_idx.size() + j);
    const double upper = j == 0 ? kInf : active[j - 1];
    const double lower = j == active.size() ? -kInf : active[j];
    if (candidate >= lower && candidate <= upper) {
      mu = candidate;
      break;
    }
    if (j < active.size()) running += active[j];
  }
  Vector s(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    s[i] = theta[i] > floor_ ? mu : std::min(g[i], mu);
  }
  return s;
}

Vector gradient_mapping(const Vector& theta, const Vector& g, double eta,
                        const Regularizer& reg) {
  return (reg.prox(theta + eta * g, eta) - theta) / eta;
}

}  // namespace proxpg
