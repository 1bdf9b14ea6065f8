#include <gtest/gtest.h>

#include <cmath>

#include <helistab/audit.hpp>
#include <helistab/error.hpp>
#include <helistab/threshold.hpp>

#include "oracles.hpp"

using namespace helistab;

TEST(Threshold, DefaultHorizon) {
  EXPECT_DOUBLE_EQ(default_horizon(1e-2), 200.0);
  EXPECT_DOUBLE_EQ(default_horizon(1e-4), 2000.0);
  EXPECT_DOUBLE_EQ(default_horizon(0.5), 10.0);
  EXPECT_THROW(default_horizon(0.0), PreconditionError);
}

TEST(Threshold, ZeroAmplitudeIsStable) {
  const auto r = classify_amplitude(1e-3, 0.0, 1, 10.0);
  EXPECT_EQ(r.verdict, Verdict::stable);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_THROW(classify_amplitude(1e-3, -1.0, 1, 10.0), PreconditionError);
}

TEST(Threshold, VerdictNames) {
  EXPECT_EQ(to_string(Verdict::stable), "stable");
  EXPECT_EQ(to_string(Verdict::unstable), "unstable");
  EXPECT_EQ(to_string(Verdict::inconclusive), "inconclusive");
}

TEST(Threshold, ClassifierRules) {
  TrajectoryResult r{PerturbationState(SpectralField(TorusGrid(4, 4, 4, 1.0), Rank::vector), 0, 1e-2)};
  ClassifierOptions opt;
  r.diverged = true;
  EXPECT_EQ(classify(r, 1.0, opt), Verdict::unstable);
}

TEST(Threshold, SmallDataOnCoarseGridIsStable) {
  DnsRunSpec spec;
  spec.n1 = spec.n2 = spec.ny = 16;
  const auto r = classify_amplitude(1e-2, 1e-6, 3, 100.0, spec);
  EXPECT_EQ(r.verdict, Verdict::stable) << r.failure;
  EXPECT_LE(r.E1_max, 2 * r.E1_initial);
}

TEST(Threshold, LargeDataIsNotStable) {
  DnsRunSpec spec;
  spec.n1 = spec.n2 = spec.ny = 16;
  const auto r = classify_amplitude(1e-2, 1e3, 3, 20.0, spec);
  EXPECT_NE(r.verdict, Verdict::stable);
}

TEST(Audit, ProductRatioVanishingLeftSide) {
  const TorusGrid g(16, 16, 16, 2.0);
  SpectralField f1(g, Rank::scalar), f2(g, Rank::scalar);
  f1.set_mode(0, 1, 0, 0, Complex(0, -0.5));  // sin x1
  f2.set_mode(0, 0, 0, 0, 3.0);               // constant
  EXPECT_EQ(product_ratio(f1, f2, 1), 0.0);
  EXPECT_THROW(product_ratio(f1, f2, 3), PreconditionError);
}

TEST(Audit, ProductRatioMatchesQuadrature) {
  const double delta = 2.0;
  const TorusGrid g(16, 16, 16, delta);
  SpectralField f1(g, Rank::scalar), f2(g, Rank::scalar);
  f1.set_mode(0, 1, 0, 0, Complex(0, -0.5));
  f1.set_mode(0, 0, 1, 1, 0.25);
  f2.set_mode(0, 1, 0, 0, Complex(0, -0.5));
  f2.set_mode(0, 1, 1, -2, Complex(0.3, 0.1));
  for (int i : {1, 2}) {
    const int a = i == 1, b = i == 2;
    auto sq = [&](auto f) { return std::sqrt(oracle::integrate(delta, 16, f)); };
    const double lhs = sq([&](double x, double z, double y) {
      const double v = oracle::eval(f1, 0, x, z, y) * oracle::eval_derivative(f2, 0, a, b, 0, x, z, y);
      return v * v;
    });
    const double df1 = sq([&](double x, double z, double y) {
      const double v = oracle::eval_derivative(f1, 0, a, b, 0, x, z, y);
      return v * v;
    });
    const double n1 = sq([&](double x, double z, double y) {
      const double v = oracle::eval(f1, 0, x, z, y);
      return v * v;
    });
    const double lap = sq([&](double x, double z, double y) {
      const double v = oracle::eval_derivative(f2, 0, 2, 0, 0, x, z, y) +
                       oracle::eval_derivative(f2, 0, 0, 2, 0, x, z, y) +
                       oracle::eval_derivative(f2, 0, 0, 0, 2, x, z, y);
      return v * v;
    });
    EXPECT_NEAR(product_ratio(f1, f2, i), lhs / ((df1 + n1) * lap), 1e-12);
  }
}

TEST(Audit, RandomFieldsAreDivergenceFreeAndDeterministic) {
  const TorusGrid g(16, 16, 16, 2.0);
  const SpectralField a = random_audit_field(g, 3, 5), b = random_audit_field(g, 3, 5);
  EXPECT_EQ((a - b).max_abs(), 0.0);
  EXPECT_LE(max_divergence(a), 1e-12 * a.max_abs());
  EXPECT_THROW(random_audit_field(g, 4, 5), PreconditionError);
  for (double r : structure_ratios(a)) EXPECT_TRUE(std::isfinite(r));
}

TEST(Audit, ReportShapeAndPreconditions) {
  EXPECT_THROW(inequality_audit(49, 1), PreconditionError);
  const auto rep = inequality_audit(50, 1);
  ASSERT_EQ(rep.stats.size(), audit_inequality_count);
  for (std::size_t i = 0; i < rep.stats.size(); ++i) {
    EXPECT_EQ(rep.stats[i].name, audit_inequality_names[i]);
    EXPECT_TRUE(std::isfinite(rep.stats[i].max_ratio));
    EXPECT_GE(rep.stats[i].max_ratio, rep.stats[i].mean_ratio);
  }
  const auto again = inequality_audit(50, 1);
  EXPECT_EQ(again.stats[3].max_ratio, rep.stats[3].max_ratio);
}
