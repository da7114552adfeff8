#include <gtest/gtest.h>

#include <cmath>

#include "proxpg/error.hpp"
#include "proxpg/theory.hpp"

using namespace proxpg;

namespace {

TheoryConstants tc(double u, double cg, double ch, double cgt, double cht,
                   std::optional<double> cw = std::nullopt) {
  TheoryConstants t;
  t.reward_bound = u;
  t.score_bound = cg;
  t.score_hessian_bound = ch;
  t.reward_grad_bound = cgt;
  t.reward_hessian_bound = cht;
  t.weight_bound = cw;
  return t;
}

DerivedConstants dc_of(double L, double s2, std::optional<double> C = std::nullopt) {
  DerivedConstants d;
  d.L = L;
  d.sigma_sq = s2;
  d.C = C;
  return d;
}

}  // namespace

TEST(DerivedConstants, HandComputedValues) {
  EXPECT_EQ(lipschitz_L(tc(1, 2, 1, 0, 0)), 5.0);
  EXPECT_EQ(lipschitz_L(tc(0, 0, 0, 0, 0)), 0.0);
  EXPECT_EQ(lipschitz_L(tc(1, 1, 1, 1, 1)), 5.0);
  EXPECT_EQ(sigma_sq(tc(1, 2, 0, 0, 0)), 8.0);
  EXPECT_EQ(sigma_sq(tc(0, 0, 0, 0, 0)), 0.0);
  EXPECT_EQ(sigma_sq(tc(2, 1, 0, 1, 0)), 10.0);
  EXPECT_EQ(page_C(tc(1, 1, 1, 0, 0, 1.0)), 30.0);
  EXPECT_EQ(page_C(tc(0, 0, 0, 0, 0, 0.0)), 0.0);
  // 0 + 6 + 6 + (4 + 4)(2 + 0)(0 + 1): the C_h term vanishes with C_h = 0.
  EXPECT_EQ(page_C(tc(1, 1, 0, 1, 1, 0.0)), 28.0);
}

TEST(DerivedConstants, MissingWeightBound) {
  try {
    page_C(tc(1, 1, 1, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingCw);
  }
  const DerivedConstants d = DerivedConstants::from(tc(1, 2, 1, 0, 0));
  EXPECT_EQ(d.L, 5.0);
  EXPECT_EQ(d.sigma_sq, 8.0);
  EXPECT_FALSE(d.C);
  EXPECT_THROW(page_schedule(0.1, d), Error);
}

TEST(CeilCount, ToleratesRoundingAndFloorsAtOne) {
  EXPECT_EQ(ceil_count(39999.999999999993), 40000u);
  EXPECT_EQ(ceil_count(40000.5), 40001u);
  EXPECT_EQ(ceil_count(1e-9), 1u);
  EXPECT_EQ(ceil_count(0.0), 1u);
  EXPECT_THROW(ceil_count(std::nan("")), Error);
}

TEST(SpgSchedule, WorkedInstance) {
  const SpgSchedule s = spg_schedule(0.1, 1.0, dc_of(5.0, 8.0));
  EXPECT_DOUBLE_EQ(s.eta, 0.05);
  EXPECT_EQ(s.T, 40000u);
  // sigma^2/eps^2 (4 + 4/(eta L (1 - 2 eta L))) = 800 (4 + 4/0.125) = 28800.
  EXPECT_EQ(s.N, 28800u);
  EXPECT_DOUBLE_EQ(s.total_samples, 40000.0 * 28800.0);
  EXPECT_FALSE(s.degenerate_L);
}

TEST(SpgSchedule, LargeEpsilonGivesSingleIteration) {
  const SpgSchedule s = spg_schedule(1e6, 1.0, dc_of(5.0, 8.0));
  EXPECT_EQ(s.T, 1u);
  EXPECT_EQ(s.N, 1u);
}

TEST(SpgSchedule, StepTooLarge) {
  for (double eta : {0.1, 0.2}) {
    try {
      spg_schedule(0.1, 1.0, dc_of(5.0, 8.0), eta);
      FAIL() << eta;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::StepTooLarge);
    }
  }
  EXPECT_NO_THROW(spg_schedule(0.1, 1.0, dc_of(5.0, 8.0), 0.0999));
}

TEST(SpgSchedule, DegenerateLIsFlagged) {
  const SpgSchedule s = spg_schedule(0.1, 1.0, dc_of(0.0, 8.0));
  EXPECT_TRUE(s.degenerate_L);
  EXPECT_EQ(s.eta, 1.0);
  EXPECT_EQ(s.T, 1200u);
  EXPECT_EQ(s.N, 3200u);
  EXPECT_FALSE(s.warnings.empty());
}

TEST(SpgSchedule, Monotone) {
  const double eps[] = {0.05, 0.1, 0.2, 0.4};
  for (int i = 0; i + 1 < 4; ++i) {
    const auto a = spg_schedule(eps[i], 1.0, dc_of(5.0, 8.0));
    const auto b = spg_schedule(eps[i + 1], 1.0, dc_of(5.0, 8.0));
    EXPECT_GE(a.T, b.T);
    EXPECT_GE(a.N, b.N);
  }
  for (double delta : {0.5, 1.0, 2.0}) {
    EXPECT_LE(spg_schedule(0.1, delta, dc_of(5.0, 8.0)).T,
              spg_schedule(0.1, 2.0 * delta, dc_of(5.0, 8.0)).T);
  }
  for (double s2 : {1.0, 8.0, 20.0}) {
    EXPECT_LE(spg_schedule(0.1, 1.0, dc_of(5.0, s2)).N,
              spg_schedule(0.1, 1.0, dc_of(5.0, 2.0 * s2)).N);
  }
}

TEST(PageSchedule, WorkedInstance) {
  const PageSchedule s = page_schedule(0.1, dc_of(5.0, 8.0, 30.0), 1.0);
  EXPECT_EQ(s.N1, 100u);
  EXPECT_EQ(s.N2, 10u);
  EXPECT_DOUBLE_EQ(s.p, 1.0 / 11.0);
  EXPECT_DOUBLE_EQ(s.eta_max, 1.0 / 22.0);
  EXPECT_DOUBLE_EQ(s.eta, s.eta_max);
  EXPECT_EQ(s.T, 100u);
  const double per = s.p * 100.0 + (1.0 - s.p) * 10.0;
  EXPECT_DOUBLE_EQ(s.expected_per_iteration, per);
  EXPECT_NEAR(per, 2.0 * 100.0 * 10.0 / 110.0, 1e-12);
  EXPECT_LE(per, 2.0 * 10.0);
  EXPECT_DOUBLE_EQ(s.expected_total, 100.0 + 100.0 * per);
}

TEST(PageSchedule, ConstantsAndOverrides) {
  const PageSchedule s = page_schedule(0.2, dc_of(5.0, 8.0, 30.0), 4.0, 2.0);
  EXPECT_EQ(s.N1, 100u);
  EXPECT_EQ(s.T, 50u);
  const PageSchedule big = page_schedule(0.2, dc_of(5.0, 8.0, 30.0), 1.0, std::nullopt, 0.5);
  EXPECT_EQ(big.eta, 0.5);
  EXPECT_FALSE(big.warnings.empty());
}

TEST(PageSchedule, PerIterationCostAtMostTwiceN2) {
  for (double eps : {0.5, 0.2, 0.1, 0.05, 0.013}) {
    const PageSchedule s = page_schedule(eps, dc_of(5.0, 8.0, 30.0));
    EXPECT_LE(s.expected_per_iteration, 2.0 * static_cast<double>(s.N2) * (1 + 1e-15));
  }
}

TEST(PageSchedule, ContractionAtLeastHalfAtEtaMax) {
  const double Ls[] = {0.5, 1.0, 5.0, 40.0};
  const double Cs[] = {1.0, 30.0, 1e3, 1e6};
  for (double L : Ls) {
    for (double C : Cs) {
      for (double eps : {0.5, 0.1, 0.02}) {
        const PageSchedule s = page_schedule(eps, dc_of(L, 1.0, C));
        // Exactly 1/2 when N1 is a perfect square, so allow rounding.
        EXPECT_GE(page_contraction(s.p, s.N2, s.eta_max, L, C), 0.5 - 1e-12)
            << "L=" << L << " C=" << C << " eps=" << eps;
      }
    }
  }
}

TEST(Bounds, StationarityAndErrorSumArithmetic) {
  // eta L = 1/4: 2 + 2/(1/8) = 18 and 2/eta + 4/(eta/2) = 10/eta.
  EXPECT_DOUBLE_EQ(stationarity_bound_rhs(0.05, 5.0, 10, 0.1, 2.0), 18.0 * 0.1 + 0.2 * 200.0);
  const ErrorSumBound l = error_sum_bound(3.0, 0.5, 100, 10, 0.05, 5.0, 30.0, 8.0, 20, 1.0);
  const double contraction = 1.0 - 0.5 * 30.0 * 0.05 / (0.5 * 10.0 * 5.0 * 0.5);
  EXPECT_DOUBLE_EQ(l.lhs, contraction * 3.0);
  EXPECT_DOUBLE_EQ(l.rhs, (0.5 * 8.0 * 20.0 + 8.0) / 50.0 + 2.0 * 0.05 * 0.5 * 30.0 / (5.0 * 0.5));
}
