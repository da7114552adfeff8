#ifndef PROXPG_THEORY_HPP_
#define PROXPG_THEORY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proxpg/core.hpp"

namespace proxpg {

/// L = U (C_g^2 + C_h) + C~_h + 2 C_g C~_g
double lipschitz_L(const TheoryConstants& tc);

/// sigma^2 = 2 U^2 C_g^2 + 2 C~_g^2
double sigma_sq(const TheoryConstants& tc);

/// C = 6 U^2 C_h^2 + 6 C_g^2 C~_g^2 + 6 C~_h^2
///     + (4 U^2 C_g^2 + 4 C~_g^2)(2 C_g^2 + C_h)(C_w^2 + 1).
/// Throws MissingCw when the weight bound is absent.
double page_C(const TheoryConstants& tc);

struct DerivedConstants {
  double L = 0.0;
  double sigma_sq = 0.0;
  std::optional<double> C;  // absent without a weight bound
  TheoryConstants source;

  static DerivedConstants from(const TheoryConstants& tc);
  /// C, or MissingCw.
  double require_C() const;
};

/// ceil with a relative slack of 1e-12, so values that are integers up to
/// rounding (39999.999...) are not bumped to the next integer. Never below 1.
std::uint64_t ceil_count(double x);

struct SpgSchedule {
  double eta = 0.0;
  std::uint64_t T = 0;
  std::uint64_t N = 0;
  double total_samples = 0.0;  // T * N
  bool degenerate_L = false;
  std::vector<std::string> warnings;
};

/// T = ceil(Delta / eps^2 (4/eta + 8/(eta (1 - 2 eta L)))),
/// N = ceil(sigma^2 / eps^2 (4 + 4/(eta L (1 - 2 eta L)))).
/// eta defaults to 1/(4L); eta >= 1/(2L) throws StepTooLarge. With L = 0 the
/// formulas are evaluated in their L -> 0 limit (T from 12/eta, N = 4 sigma^2
/// / eps^2, eta defaulting to 1) and the result is flagged.
SpgSchedule spg_schedule(double eps, double delta, const DerivedConstants& dc,
                         std::optional<double> eta = std::nullopt);

struct PageSchedule {
  std::uint64_t N1 = 0;
  std::uint64_t N2 = 0;
  double p = 0.0;
  double eta_max = 0.0;
  double eta = 0.0;  // eta_max unless overridden
  std::uint64_t T = 0;
  double expected_per_iteration = 0.0;  // p N1 + (1 - p) N2
  double expected_total = 0.0;          // N1 + T (p N1 + (1 - p) N2)
  std::vector<std::string> warnings;
};

/// N1 = ceil(c_N1 / eps^2), N2 = ceil(sqrt(N1)), p = N2 / (N1 + N2),
/// eta_max = L / (2C + 2L^2), T = ceil(c_T / eps^2) with c_T defaulting to c_N1.
PageSchedule page_schedule(double eps, const DerivedConstants& dc, double c_n1 = 1.0,
                           std::optional<double> c_t = std::nullopt,
                           std::optional<double> eta = std::nullopt);

/// 1 - (1 - p) C eta / (p N2 L (1 - 2 eta L)), the factor on the PAGE error sum.
double page_contraction(double p, std::uint64_t n2, double eta, double L, double C);

/// Right side of the averaged stationarity bound:
/// (2 + 2/(eta L (1 - 2 eta L))) mean_error + Delta/T (2/eta + 4/(eta (1 - 2 eta L))).
double stationarity_bound_rhs(double eta, double L, std::uint64_t T, double mean_error, double delta);

struct ErrorSumBound {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = contraction * sum_error, rhs = (p sigma^2 T + sigma^2)/(p N1)
///       + 2 eta (1 - p) C Delta / (p N2 (1 - 2 eta L)).
ErrorSumBound error_sum_bound(double sum_error, double p, std::uint64_t n1, std::uint64_t n2,
                         double eta, double L, double C, double sigma_sq, std::uint64_t T,
                         double delta);

}  // namespace proxpg

#endif  // PROXPG_THEORY_HPP_
