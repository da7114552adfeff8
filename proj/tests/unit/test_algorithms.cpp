#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "proxpg/algorithms.hpp"
#include "proxpg/environments.hpp"
#include "proxpg/error.hpp"
#include "proxpg/theory.hpp"

using namespace proxpg;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

RunOptions tracked() {
  RunOptions o;
  o.track_exact = true;
  return o;
}

}  // namespace

TEST(RunSpg, EmptyRunAndInfeasibleStart) {
  const SoftmaxBandit env({1.0, 0.0});
  try {
    run_spg(env, ZeroReg(), {0.1, 10, 0, 1}, ParamVector::zeros(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyRun);
  }
  try {
    run_spg(env, BoxIndicator(1.0, 2.0), {0.1, 10, 5, 1}, ParamVector::zeros(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InfeasiblePoint);
  }
}

TEST(RunSpg, LargeBatchAscendsAndBecomesStationary) {
  const SoftmaxBandit env({1.0, 0.0});
  const RunTrace trace = run_spg(env, ZeroReg(), {0.1, 10000, 200, 3}, ParamVector::zeros(2),
                                 tracked());
  ASSERT_EQ(trace.records.size(), 201u);
  for (std::size_t t = 1; t < trace.records.size(); ++t) {
    EXPECT_GE(*trace.records[t].objective, *trace.records[t - 1].objective - 1e-3);
    EXPECT_GE(trace.records[t].cumulative_samples, trace.records[t - 1].cumulative_samples);
  }
  EXPECT_LE(*trace.records.back().grad_mapping_norm, 0.05);
  EXPECT_GE(trace.output_index, 1u);
  EXPECT_LE(trace.output_index, 200u);
  EXPECT_EQ(trace.records.back().cumulative_samples, 200u * 10000u);
}

TEST(RunSpg, PointMassMatchesHandRolledAscent) {
  const PointMassEnv env(vec({1.0, -2.0, 0.5}), 1.0, 1.5);
  const double eta = 0.7;
  const RunTrace trace = run_spg(env, ZeroReg(), {eta, 3, 60, 9}, ParamVector::zeros(3));
  Vector theta = Vector::Zero(3);
  for (std::size_t t = 0; t <= 60; ++t) {
    ASSERT_EQ(trace.records[t].theta, theta) << "t = " << t;
    theta = theta + eta * env.grad_reward(theta, Outcome{{0}});
  }
}

TEST(RunSpg, ReproducibleForSeed) {
  const SoftmaxBandit env({1.0, 0.5, 0.0});
  const ScaledSquaredNorm reg(0.1);
  const SpgConfig cfg{0.0625, 50, 40, 77};
  const RunTrace a = run_spg(env, reg, cfg, ParamVector::zeros(3));
  const RunTrace b = run_spg(env, reg, cfg, ParamVector::zeros(3));
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t t = 0; t < a.records.size(); ++t) EXPECT_EQ(a.records[t].theta, b.records[t].theta);
  EXPECT_EQ(a.output_index, b.output_index);
  RunOptions parallel;
  parallel.workers = 4;
  const RunTrace c = run_spg(env, reg, cfg, ParamVector::zeros(3), parallel);
  EXPECT_EQ(c.records.back().theta, a.records.back().theta);
}

TEST(RunPage, ProbabilityOneMatchesSpg) {
  const SoftmaxBandit env({1.0, 0.5, 0.0});
  const ScaledSquaredNorm reg(0.1);
  const RunTrace spg = run_spg(env, reg, {0.0625, 64, 30, 5}, ParamVector::zeros(3));
  const RunTrace page = run_page(env, reg, {0.0625, 64, 8, 1.0, 30, 5}, ParamVector::zeros(3));
  ASSERT_EQ(page.records.size(), spg.records.size());
  for (std::size_t t = 0; t < spg.records.size(); ++t) {
    EXPECT_EQ(page.records[t].theta, spg.records[t].theta);
    EXPECT_TRUE(page.records[t].branch == Branch::Full);
  }
  // PAGE also forms g^T.
  EXPECT_TRUE(page.records.back().estimator);
  EXPECT_FALSE(spg.records.back().estimator);
}

TEST(RunPage, BranchFrequencyAndCost) {
  const SoftmaxBandit env({1.0, 0.5, 0.0});
  const PageConfig cfg{0.0625, 100, 10, 0.25, 2000, 8};
  const RunTrace trace = run_page(env, ZeroReg(), cfg, ParamVector::zeros(3));
  std::size_t full = 0;
  for (std::size_t t = 1; t < trace.records.size(); ++t) {
    if (trace.records[t].branch == Branch::Full) ++full;
    EXPECT_TRUE(trace.records[t].samples_used == 100 || trace.records[t].samples_used == 10);
  }
  const double m = 2000.0;
  EXPECT_NEAR(full / m, 0.25, 4.0 * std::sqrt(0.25 * 0.75 / m));
  // Equal batch sizes: cost per iteration is N1 whatever the branch.
  const RunTrace equal = run_page(env, ZeroReg(), {0.0625, 20, 20, 0.4, 50, 1}, ParamVector::zeros(3));
  EXPECT_EQ(equal.records.back().cumulative_samples, 51u * 20u);
}

TEST(RunPage, DivergenceGuard) {
  // One exact step of size 1e3 on a steep bump overshoots past 1e8.
  const PointMassEnv env(vec({0.0}), 1e9, 1.0);
  try {
    run_spg(env, ZeroReg(), {1e3, 1, 10, 0}, ParamVector(vec({1.0})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NumericalDivergence);
  }
}

TEST(RunOptions, StopAndSampleCap) {
  const SoftmaxBandit env({1.0, 0.0});
  RunOptions stop = tracked();
  stop.stop = [](const IterationRecord& r) { return r.t == 7; };
  const RunTrace a = run_spg(env, ZeroReg(), {0.1, 10, 100, 1}, ParamVector::zeros(2), stop);
  EXPECT_TRUE(a.stopped_early);
  EXPECT_EQ(a.records.back().t, 7u);
  EXPECT_EQ(a.records.back().cumulative_samples, 70u);
  EXPECT_LE(a.output_index, 7u);

  RunOptions cap;
  cap.sample_cap = 35;
  const RunTrace b = run_spg(env, ZeroReg(), {0.1, 10, 100, 1}, ParamVector::zeros(2), cap);
  EXPECT_TRUE(b.budget_exceeded);
  EXPECT_EQ(b.records.back().t, 3u);
}

TEST(MeasureStationarity, ZeroRegEqualsGradientNorm) {
  const SoftmaxBandit env({1.0, 0.3, 0.0});
  const Vector theta = vec({0.5, -0.1, 0.2});
  const Stationarity s = measure_stationarity(env, ZeroReg(), theta, 0.1);
  const double norm = exact_gradient(env, theta).norm();
  EXPECT_DOUBLE_EQ(s.subdiff_distance, norm);
  EXPECT_NEAR(s.gradient_mapping_norm, norm, 1e-15);
  const Stationarity mc = measure_stationarity(env, ZeroReg(), theta, 0.1, 200000, 3);
  EXPECT_NEAR(mc.subdiff_distance, norm, 0.01);
}

TEST(MeasureStationarity, GridSearchedStationaryPoint) {
  // 2-arm bandit r = (1, 0) with (lambda/2)||theta||^2. By symmetry the
  // stationary point is (a, -a) with sigma(2a) sigma(-2a) = lambda a.
  const double lambda = 0.2;
  auto residual = [&](double a) {
    const double p = 1.0 / (1.0 + std::exp(-2.0 * a));
    return std::abs(p * (1.0 - p) - lambda * a);
  };
  double lo = 0.0, hi = 5.0, best = 0.0;
  for (int level = 0; level < 8; ++level) {
    const double step = (hi - lo) / 1000.0;
    double best_r = 1e300;
    for (int k = 0; k <= 1000; ++k) {
      const double a = lo + k * step;
      if (residual(a) < best_r) {
        best_r = residual(a);
        best = a;
      }
    }
    lo = std::max(0.0, best - step);
    hi = best + step;
  }
  const SoftmaxBandit env({1.0, 0.0});
  const Stationarity s = measure_stationarity(env, ScaledSquaredNorm(lambda), vec({best, -best}), 0.5);
  EXPECT_LE(s.subdiff_distance, 1e-6);
  EXPECT_LE(s.gradient_mapping_norm, 1e-6);
}

TEST(MeasureStationarity, GradientMappingBelowSubdiffDistance) {
  RandomStream rng(12, 0);
  const auto theta_env = ThetaRewardBandit::with_random_directions({1.0, 0.2, 0.7}, 0.6, 2);
  const DirectBandit direct({1.0, 0.2, 0.7}, 0.05);
  const ScaledSquaredNorm l2(0.3);
  const L1 l1(0.2);
  const BoxIndicator box(-1.0, 1.0);
  const LowerBoundedSimplexIndicator floored(3, 0.05);
  for (int i = 0; i < 100; ++i) {
    const Vector t = theta_env.random_point(rng);
    const double eta = 0.05 + rng.uniform();
    for (const Regularizer* reg : {static_cast<const Regularizer*>(&l2), static_cast<const Regularizer*>(&l1)}) {
      const Stationarity s = measure_stationarity(theta_env, *reg, t, eta);
      EXPECT_LE(s.gradient_mapping_norm, s.subdiff_distance + 1e-12);
    }
    const Vector in_box = box.prox(t, 1.0);
    const Stationarity sb = measure_stationarity(theta_env, box, in_box, eta);
    EXPECT_LE(sb.gradient_mapping_norm, sb.subdiff_distance + 1e-12);
    const Vector d = direct.random_point(rng);
    const Stationarity sd = measure_stationarity(direct, floored, d, eta);
    EXPECT_LE(sd.gradient_mapping_norm, sd.subdiff_distance + 1e-12);
  }
}

TEST(ProximalGradientAscent, MonotoneWithExactGradients) {
  const auto env = ThetaRewardBandit::with_random_directions({1.0, 0.5, 0.0}, 0.5, 4);
  const L1 reg(0.05);
  const double L = lipschitz_L(env.constants());
  const auto path = proximal_gradient_ascent(env, reg, vec({0.3, -0.2, 0.1}), 0.4 / L, 300);
  for (std::size_t t = 1; t < path.size(); ++t) {
    EXPECT_GE(composite_value(env, reg, path[t]), composite_value(env, reg, path[t - 1]) - 1e-14);
  }
}

TEST(StationarityBound, HoldsOnSeededRuns) {
  const SoftmaxBandit env({1.0, 0.5, 0.0});
  const ScaledSquaredNorm reg(0.1);
  const double L = lipschitz_L(env.constants());
  const double eta = 1.0 / (4.0 * L);
  const Vector theta0 = Vector::Zero(3);
  const auto ascent = proximal_gradient_ascent(env, reg, theta0, eta, 20000);
  double f_star = composite_value(env, reg, ascent.back());
  const std::size_t T = 100;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const RunTrace trace = run_spg(env, reg, {eta, 100, T, seed}, ParamVector(theta0), tracked());
    double lhs = 0.0, mean_error = 0.0, f_max = f_star;
    for (std::size_t t = 0; t < T; ++t) {
      mean_error += *trace.records[t].estimator_error / T;
      const double d = *trace.records[t + 1].subdiff_distance;
      lhs += d * d / T;
      f_max = std::max(f_max, *trace.records[t + 1].objective);
    }
    const double delta = f_max - composite_value(env, reg, theta0);
    EXPECT_LE(lhs, stationarity_bound_rhs(eta, L, T, mean_error, delta)) << "seed " << seed;
  }
}

TEST(DefaultDelta, UpperBoundsTrueGap) {
  const SoftmaxBandit env({1.0, 0.5, 0.0});
  const ScaledSquaredNorm reg(0.1);
  const Vector theta0 = vec({0.2, 0.1, -0.3});
  const auto path = proximal_gradient_ascent(env, reg, theta0, 0.0625, 5000);
  const double gap = composite_value(env, reg, path.back()) - composite_value(env, reg, theta0);
  EXPECT_GE(default_delta(env, reg, theta0), gap);
}

TEST(RunPage, PageScheduleBatchesReachToleranceOnAverage) {
  // Batch sizes and p from the eps = 0.2 schedule. The admissible step
  // L/(2C + 2L^2) is ~1e-5 here, so the step is overridden with 1/(4L) and
  // the iteration count raised (c_T = 10).
  const SoftmaxBandit env({1.0, 0.5, 0.0}, 2.0);
  const DerivedConstants dc = DerivedConstants::from(env.constants());
  const PageSchedule s = page_schedule(0.2, dc, 1.0, 10.0, 1.0 / (4.0 * dc.L));
  double mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RunTrace trace =
        run_page(env, ZeroReg(), {s.eta, s.N1, s.N2, s.p, s.T, seed}, ParamVector::zeros(3));
    const Vector& out = trace.output().theta;
    mean += exact_gradient(env, out).squaredNorm() / 20.0;
  }
  EXPECT_LE(mean, 0.04);
}
