#include "proxpg/theory.hpp"

#include <cmath>
#include <sstream>

#include "proxpg/error.hpp"

namespace proxpg {

double lipschitz_L(const TheoryConstants& tc) {
  tc.validate();
  const double cg = tc.score_bound;
  return tc.reward_bound * (cg * cg + tc.score_hessian_bound) + tc.reward_hessian_bound +
         2.0 * cg * tc.reward_grad_bound;
}

double sigma_sq(const TheoryConstants& tc) {
  tc.validate();
  const double u = tc.reward_bound;
  const double cg = tc.score_bound;
  const double cgt = tc.reward_grad_bound;
  return 2.0 * u * u * cg * cg + 2.0 * cgt * cgt;
}

double page_C(const TheoryConstants& tc) {
  tc.validate();
  if (!tc.weight_bound) {
    throw Error(Errc::MissingCw, "environment declares no importance-weight bound");
  }
  const double u = tc.reward_bound;
  const double cg = tc.score_bound;
  const double ch = tc.score_hessian_bound;
  const double cgt = tc.reward_grad_bound;
  const double cht = tc.reward_hessian_bound;
  const double cw = *tc.weight_bound;
  return 6.0 * u * u * ch * ch + 6.0 * cg * cg * cgt * cgt + 6.0 * cht * cht +
         (4.0 * u * u * cg * cg + 4.0 * cgt * cgt) * (2.0 * cg * cg + ch) * (cw * cw + 1.0);
}

DerivedConstants DerivedConstants::from(const TheoryConstants& tc) {
  DerivedConstants dc;
  dc.L = lipschitz_L(tc);
  dc.sigma_sq = proxpg::sigma_sq(tc);
  if (tc.weight_bound) dc.C = page_C(tc);
  dc.source = tc;
  return dc;
}

double DerivedConstants::require_C() const {
  if (!C) throw Error(Errc::MissingCw, "environment declares no importance-weight bound");
  return *C;
}

std::uint64_t ceil_count(double x) {
  if (!std::isfinite(x)) throw Error(Errc::InvalidArgument, "schedule count is not finite");
  if (x <= 1.0) return 1;
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-12 * x) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(x));
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(Errc::InvalidArgument, std::string(what) + " must be positive and finite");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

SpgSchedule spg_schedule(double eps, double delta, const DerivedConstants& dc,
                         std::optional<double> eta) {
  require_positive(eps, "epsilon");
  require_positive(delta, "Delta");
  if (eta) require_positive(*eta, "eta");
  const double e2 = eps * eps;
  SpgSchedule s;
  if (dc.L == 0.0) {
    // L -> 0 limit: 4/eta + 8/(eta(1 - 2 eta L)) -> 12/eta and
    // 4/(eta L (1 - 2 eta L)) diverges, so only the variance term is kept.
    s.degenerate_L = true;
    s.eta = eta.value_or(1.0);
    s.T = ceil_count(delta / e2 * 12.0 / s.eta);
    s.N = ceil_count(4.0 * dc.sigma_sq / e2);
    s.warnings.push_back("L = 0: step size unconstrained, N from the variance term only");
  } else {
    s.eta = eta.value_or(1.0 / (4.0 * dc.L));
    const double slack = 1.0 - 2.0 * s.eta * dc.L;
    if (!(slack > 0.0)) {
      throw Error(Errc::StepTooLarge,
                  "eta = " + fmt(s.eta) + " is not below 1/(2L) = " + fmt(0.5 / dc.L));
    }
    s.T = ceil_count(delta / e2 * (4.0 / s.eta + 8.0 / (s.eta * slack)));
    s.N = ceil_count(dc.sigma_sq / e2 * (4.0 + 4.0 / (s.eta * dc.L * slack)));
  }
  s.total_samples = static_cast<double>(s.T) * static_cast<double>(s.N);
  return s;
}

PageSchedule page_schedule(double eps, const DerivedConstants& dc, double c_n1,
                           std::optional<double> c_t, std::optional<double> eta) {
  require_positive(eps, "epsilon");
  require_positive(c_n1, "c_N1");
  if (c_t) require_positive(*c_t, "c_T");
  if (eta) require_positive(*eta, "eta");
  const double C = dc.require_C();
  const double e2 = eps * eps;
  PageSchedule s;
  s.N1 = ceil_count(c_n1 / e2);
  s.N2 = ceil_count(std::sqrt(static_cast<double>(s.N1)));
  const double n1 = static_cast<double>(s.N1);
  const double n2 = static_cast<double>(s.N2);
  s.p = n2 / (n1 + n2);
  const double denom = 2.0 * C + 2.0 * dc.L * dc.L;
  s.eta_max = denom > 0.0 ? dc.L / denom : 0.0;
  s.eta = eta.value_or(s.eta_max);
  s.T = ceil_count(c_t.value_or(c_n1) / e2);
  s.expected_per_iteration = s.p * n1 + (1.0 - s.p) * n2;
  s.expected_total = n1 + static_cast<double>(s.T) * s.expected_per_iteration;
  if (dc.L == 0.0) {
    s.warnings.push_back("L = 0: eta_max is 0; supply eta explicitly");
  } else if (s.eta > s.eta_max) {
    s.warnings.push_back("eta = " + fmt(s.eta) + " exceeds L/(2C + 2L^2) = " + fmt(s.eta_max));
  }
  if (s.eta <= 0.0) throw Error(Errc::InvalidArgument, "PAGE step size must be positive");
  return s;
}

double page_contraction(double p, std::uint64_t n2, double eta, double L, double C) {
  return 1.0 - (1.0 - p) * C * eta /
                   (p * static_cast<double>(n2) * L * (1.0 - 2.0 * eta * L));
}

double stationarity_bound_rhs(double eta, double L, std::uint64_t T, double mean_error, double delta) {
  const double slack = 1.0 - 2.0 * eta * L;
  return (2.0 + 2.0 / (eta * L * slack)) * mean_error +
         delta / static_cast<double>(T) * (2.0 / eta + 4.0 / (eta * slack));
}

ErrorSumBound error_sum_bound(double sum_error, double p, std::uint64_t n1, std::uint64_t n2,
                         double eta, double L, double C, double sigma_sq, std::uint64_t T,
                         double delta) {
  const double slack = 1.0 - 2.0 * eta * L;
  ErrorSumBound s;
  s.lhs = page_contraction(p, n2, eta, L, C) * sum_error;
  s.rhs = (p * sigma_sq * static_cast<double>(T) + sigma_sq) / (p * static_cast<double>(n1)) +
          2.0 * eta * (1.0 - p) * C * delta / (p * static_cast<double>(n2) * slack);
  return s;
}

}  // namespace proxpg
