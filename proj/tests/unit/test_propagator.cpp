#include <gtest/gtest.h>

#include <random>

#include <helistab/error.hpp>
#include <helistab/propagator.hpp>
#include <helistab/pseudospectrum.hpp>

#include "oracles.hpp"

using namespace helistab;
using oracle::Complex;

namespace {

Eigen::VectorXcd single(int M, int m, Complex v = 1.0) {
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(2 * M + 1);
  u(m + M) = v;
  return u;
}

}  // namespace

TEST(EvolveMode, ZeroDataStaysZero) {
  const ModeParams p = ModeParams::make(1e-3, 2, 1, 0);
  const auto tr = evolve_mode(p, Eigen::VectorXcd::Zero(33), 5.0, max_mode_dt(p, 16), {16});
  for (const auto& u : tr.u) EXPECT_EQ(u.norm(), 0.0);
  EXPECT_DOUBLE_EQ(tr.times.back(), 5.0);
}

TEST(EvolveMode, DiffusionOnlyClosedForm) {
  const ModeParams p = ModeParams::make(1e-2, 2, 1, 2);
  EvolveOptions o;
  o.trunc = 8;
  o.advection_scale = 0;
  const double T = 3.7;
  const auto tr = evolve_mode(p, single(8, 3, Complex(0.5, 1)), T, 0.01, o);
  const double rate = p.nu * p.kabs2() + p.nu * p.m0() * p.m0() * 9;
  EXPECT_NEAR(std::abs(tr.u.back()(11)), std::abs(Complex(0.5, 1)) * std::exp(-rate * T), 1e-13);
}

TEST(EvolveMode, RejectsOversizedStep) {
  const ModeParams p = ModeParams::make(1e-3, 2, 1, 0);
  EXPECT_THROW(evolve_mode(p, single(16, 0), 1.0, 2 * max_mode_dt(p, 16), {16}), PreconditionError);
}

TEST(EvolveMode, SemigroupPropertyAndStarContractivity) {
  const ModeParams p = ModeParams::make(1e-3, 2, 1, 0);
  EvolveOptions o;
  o.trunc = 32;
  const double dt = max_mode_dt(p, 32);
  const Eigen::VectorXcd u0 = smooth_mode_data(32, 0.4);
  const auto full = evolve_mode(p, u0, 40 * dt, dt, o);
  const auto first = evolve_mode(p, u0, 15 * dt, dt, o);
  const auto second = evolve_mode(p, first.u.back(), 25 * dt, dt, o);
  EXPECT_LE((full.u.back() - second.u.back()).norm(), 1e-8 * full.u.back().norm());

  const OperatorMatrix G = assemble_star_gram(p.alpha2(), 32);
  for (std::size_t i = 1; i < full.u.size(); ++i)
    EXPECT_LE(metric_norm_sq(G, full.u[i]), metric_norm_sq(G, full.u[i - 1]) * (1 + 1e-12));
}

TEST(EvolveMode, DerivativeCommutes) {
  const ModeParams p = ModeParams::make(1e-3, 2, 2, 1);
  EvolveOptions o;
  o.trunc = 16;
  const double dt = max_mode_dt(p, 16);
  const Eigen::VectorXcd u0 = smooth_mode_data(16, 1.0);
  const auto a = evolve_mode(p, u0, 2.0, dt, o);
  const auto b = evolve_mode(p, Complex(0, p.k1) * u0, 2.0, dt, o);
  EXPECT_LE((b.u.back() - Complex(0, p.k1) * a.u.back()).norm(), 1e-13 * b.u.back().norm());
}

TEST(EvolveMode, AgreesWithIndependentExponential) {
  const ModeParams p = ModeParams::make(5e-3, 1.5, 1, 1);
  const int M = 12;
  EvolveOptions o;
  o.trunc = M;
  const double T = 4.0;
  const Eigen::VectorXcd u0 = smooth_mode_data(M, 0.3);
  const auto tr = evolve_mode(p, u0, T, max_mode_dt(p, M), o);
  Eigen::MatrixXcd A = assemble_L(p, M).entries;
  A.diagonal().array() += p.nu * p.kabs2();
  const Eigen::VectorXcd ref = oracle::expm(-T * A) * u0;
  EXPECT_LE((tr.u.back() - ref).norm(), 1e-11 * ref.norm());
}

TEST(EvolveMode, EnhancedDissipationEnvelope) {
  const ModeParams p = ModeParams::make(1e-3, 2, 1, 0);
  const int M = 64;
  EvolveOptions o;
  o.trunc = M;
  o.sample_every = 100;
  const double T = 10 / std::sqrt(p.nu);
  const auto tr = evolve_mode(p, smooth_mode_data(M, 1.0), T, max_mode_dt(p, M), o);
  const double c = pseudospectral_constant(p.nu, p.delta, M);
  // e^{pi/2} prefactor and star/euclidean equivalence constant.
  const double C = std::exp(oracle::pi / 2) / (1 - 1 / p.alpha2());
  const double n0 = tr.u.front().norm();
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    EXPECT_LE(tr.u[i].norm(), C * n0 * std::exp(-c * std::sqrt(p.nu) * tr.times[i] - p.nu * tr.times[i]) * 1.05);
}

TEST(EvolveCoupled, ZeroUGivesPureHEvolution) {
  const ModeParams p = ModeParams::make(1e-3, 2, 1, 0);
  EvolveOptions o;
  o.trunc = 16;
  const double dt = max_mode_dt(p, 16);
  const Eigen::VectorXcd w0 = smooth_mode_data(16, 1.0);
  const auto c = evolve_coupled(p, Eigen::VectorXcd::Zero(33), w0, 3.0, dt, o);
  const auto h = evolve_heat_H(p, w0, 3.0, dt, o);
  EXPECT_LE((c.w.back() - h.u.back()).norm(), 1e-12);
  EXPECT_EQ(c.u.back().norm(), 0.0);
}

TEST(EvolveCoupled, CombinationSolvesHeatH) {
  const ModeParams p = ModeParams::make(2e-3, 3, 1, 1);
  const int M = 20;
  EvolveOptions o;
  o.trunc = M;
  std::mt19937_64 rng(5);
  const Eigen::VectorXcd u0 = oracle::random_vector(2 * M + 1, rng), w0 = oracle::random_vector(2 * M + 1, rng);
  const double T = 6.0;
  const auto c = evolve_coupled(p, u0, w0, T, max_mode_dt(p, M), o);
  Eigen::MatrixXcd A = assemble_H(p, M).entries;
  A.diagonal().array() += p.nu * p.kabs2();
  const Eigen::VectorXcd s0 = p.m0() * w0 + u0;
  const Eigen::VectorXcd ref = oracle::expm(-T * A) * s0;
  EXPECT_LE((c.combination(c.u.size() - 1) - ref).norm(), 1e-10 * s0.norm());
}

TEST(Dissipation, ZeroDataAndDiffusionOnlyClosedForm) {
  const ModeParams p = ModeParams::make(1e-2, 2, 1, 0);
  EvolveOptions o;
  o.trunc = 8;
  const auto z = evolve_mode(p, Eigen::VectorXcd::Zero(17), 1.0, 0.01, o);
  const auto dz = dissipation_integrals(z, 0.1);
  EXPECT_EQ(dz.plain, 0.0);
  EXPECT_EQ(dz.weighted, 0.0);

  o.advection_scale = 0;
  const int m = 2;
  const double T = 20.0, dt = 0.01;
  const auto tr = evolve_mode(p, single(8, m), T, dt, o);
  const double b = p.nu * p.kabs2() + p.nu * p.m0() * p.m0() * m * m;
  const double expected = p.nu * p.m0() * p.m0() * (p.alpha2() + m * m) * (1 - std::exp(-2 * b * T)) / (2 * b);
  EXPECT_NEAR(dissipation_integrals(tr, 0.1).plain / expected, 1.0, 1e-6);
}

TEST(ForcedEd, HomogeneousAndPulse) {
  const ModeParams p = ModeParams::make(1e-2, 2, 1, 0);
  const int M = 16;
  ForcedEdOptions o;
  o.trunc = M;
  ForcingPulse none;
  none.amplitude = 0;
  const Eigen::VectorXcd u0 = smooth_mode_data(M, 0.0);
  const auto r0 = forced_ed_check(p, u0, none, 50.0, o);
  EXPECT_TRUE(std::isfinite(r0.ratio));
  EXPECT_NEAR(r0.ratio, r0.xed_sq / r0.initial_sq, 1e-12 * r0.ratio);

  ForcingPulse pulse;
  pulse.component = 2;
  pulse.m = 1;
  pulse.t0 = 5;
  pulse.width = 1;
  const auto r1 = forced_ed_check(p, Eigen::VectorXcd::Zero(2 * M + 1), pulse, 50.0, o);
  EXPECT_TRUE(std::isfinite(r1.ratio));
  EXPECT_GT(r1.ratio, 0);
  EXPECT_EQ(r1.initial_sq, 0.0);
}

TEST(ForcedEd, RatioBoundedAsViscosityDecreases) {
  ForcingPulse pulse;
  pulse.component = 0;
  pulse.m = 1;
  pulse.t0 = 5;
  pulse.width = 2;
  for (auto system : {ForcedSystem::heat_H, ForcedSystem::L_equation, ForcedSystem::coupled}) {
    std::vector<double> ratios;
    for (double nu : {1e-2, 1e-3, 1e-4}) {
      const ModeParams p = ModeParams::make(nu, 2, 1, 0);
      ForcedEdOptions o;
      o.trunc = nu < 5e-4 ? 64 : 32;
      o.system = system;
      o.epsilon = 0.25 * 0.43;
      const auto r = forced_ed_check(p, smooth_mode_data(o.trunc, 0.0), pulse, 5 / std::sqrt(nu), o);
      ratios.push_back(system == ForcedSystem::coupled ? std::max(r.ratio, r.ratio_w) : r.ratio);
    }
    const auto hi = std::max_element(ratios.begin(), ratios.end());
    // The forcing term dominates the denominator, so the ratio may fall with nu but must not grow.
    EXPECT_LE(*hi, 1.0) << "system " << int(system);
    for (std::size_t i = 1; i < ratios.size(); ++i) EXPECT_LE(ratios[i], 2 * ratios[i - 1]) << "system " << int(system);
  }
}

TEST(Delta1, ConstantModeDecaysAtViscousRate) {
  const double nu = 1e-3, T = 200;
  const int M = 16;
  const auto r = delta1_experiment(1, 0, nu, T, single(M, 0, 0.7), Eigen::VectorXcd::Zero(2 * M + 1), M, 0.05);
  EXPECT_NEAR(std::abs(r.traj.u.back()(M)), 0.7 * std::exp(-nu * T), 1e-12);
  EXPECT_NEAR(r.p1u.rate / nu, 1.0, 1e-6);
  EXPECT_THROW(delta1_experiment(1, 1, nu, T, single(M, 0), single(M, 0), M, 0.05), PreconditionError);
}

TEST(Delta1, NonConstantPartResolvedBelowConstantMode) {
  // Q1 u falls many decades below P1 u; its norm must stay measurable.
  const double nu = 1e-3, T = 10 / std::sqrt(nu);
  const int M = 32;
  const ModeParams p = ModeParams::make(nu, 1.0, 1, 0);
  const auto r = delta1_experiment(1, 0, nu, T, smooth_mode_data(M, 1.0), Eigen::VectorXcd::Zero(2 * M + 1), M,
                                   max_mode_dt(p, M), 50);
  Eigen::VectorXcd q = r.traj.u.back();
  q(M) = 0;
  EXPECT_LT(q.norm(), 1e-6 * std::abs(r.traj.u.back()(M)));
  EXPECT_GT(r.q1u.rate, 10 * nu);
}

TEST(FitDecayRate, Examples) {
  std::vector<double> t, a, b, c;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    a.push_back(std::exp(-2 * t.back()));
    b.push_back(5 * std::exp(-0.3 * t.back()));
    c.push_back(std::exp(-0.3 * t.back()) + 2 * std::exp(-5 * t.back()));
  }
  EXPECT_NEAR(fit_decay_rate(t, a).rate, 2, 1e-12);
  const auto fb = fit_decay_rate(t, b);
  EXPECT_NEAR(fb.rate, 0.3, 1e-12);
  EXPECT_NEAR(fb.prefactor, 5, 1e-10);
  EXPECT_NEAR(fit_decay_rate(t, c).rate / 0.3, 1.0, 0.02);
  a[50] = 0;
  EXPECT_THROW(fit_decay_rate(t, a), PreconditionError);
}
