#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <helistab/error.hpp>
#include <helistab/operators.hpp>
#include <helistab/snapshot.hpp>

#include "oracles.hpp"

using namespace helistab;
using oracle::Complex;

namespace {

// e^{-iny} (-d m0^2 d_y^2 + i a sin(y + phase) G) e^{imy}, G the resolvent factor.
Complex reduced_apply(double diffusion, double amp, double phase, double alpha2, bool nonlocal, int m, double y) {
  const double g = nonlocal ? 1 - 1 / (alpha2 + double(m) * m) : 1.0;
  return (diffusion * m * m + Complex(0, amp * std::sin(y + phase)) * g) * std::polar(1.0, m * y);
}

}  // namespace

TEST(AssembleH, AdvectionOnlyExample) {
  const OperatorMatrix H = assemble_H(ModeParams::make(0, 2, 1, 0), 4);
  for (int m = -4; m <= 4; ++m) {
    EXPECT_EQ(H.entries(H.index(m), H.index(m)), Complex{});
    if (m < 4) {
      EXPECT_NEAR(std::abs(H.entries(H.index(m + 1), H.index(m)) - 2.0), 0, 1e-15);
    }
    if (m > -4) {
      EXPECT_NEAR(std::abs(H.entries(H.index(m - 1), H.index(m)) + 2.0), 0, 1e-15);
    }
  }
  EXPECT_TRUE(H.is_tridiagonal());
}

TEST(AssembleH, CosineExample) {
  const OperatorMatrix H = assemble_H(ModeParams::make(0.01, 1, 0, 1), 3);
  for (int m = -2; m <= 2; ++m) {
    EXPECT_NEAR(std::abs(H.entries(H.index(m + 1), H.index(m)) - Complex(0, 0.5)), 0, 1e-15);
    EXPECT_NEAR(std::abs(H.entries(H.index(m - 1), H.index(m)) - Complex(0, 0.5)), 0, 1e-15);
    EXPECT_NEAR(H.entries(H.index(m), H.index(m)).real(), 0.01 * m * m, 1e-15);
  }
}

TEST(AssembleH, HermitianPartIsViscous) {
  const ModeParams p = ModeParams::make(3e-3, 2.5, 2, -1);
  const OperatorMatrix H = assemble_H(p, 16);
  const Eigen::MatrixXcd S = H.entries + H.entries.adjoint();
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(33, 33);
  for (int m = -16; m <= 16; ++m) D(m + 16, m + 16) = 2 * p.nu * p.m0() * p.m0() * m * m;
  EXPECT_LE((S - D).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AssembleH, RejectsZeroWavenumber) {
  EXPECT_THROW(assemble_H(ModeParams::make(1e-3, 2, 0, 0), 8), PreconditionError);
  EXPECT_THROW(assemble_L(ModeParams::make(1e-3, 2, 0, 0), 8), PreconditionError);
  EXPECT_THROW(assemble_H(ModeParams::make(1e-3, 2, 1, 0), 1), PreconditionError);
}

TEST(AssembleL, MatchesQuadratureOracle) {
  const ModeParams p = ModeParams::make(2e-3, 1.7, 1, 2);
  const int M = 6;
  const OperatorMatrix L = assemble_L(p, M);
  const double d = p.nu * p.m0() * p.m0(), a = p.kabs() * p.delta * p.delta;
  for (int n = -M; n <= M; ++n)
    for (int m = -M; m <= M; ++m) {
      const Complex ref = oracle::galerkin_entry(
          n, m, [&](int mm, double y) { return reduced_apply(d, a, p.alpha_k(), p.alpha2(), true, mm, y); });
      EXPECT_NEAR(std::abs(L.entries(L.index(n), L.index(m)) - ref), 0, 1e-12) << n << "," << m;
    }
}

TEST(AssembleL, ExampleEntryAndTridiagonalSupport) {
  const OperatorMatrix L = assemble_L(ModeParams::make(0, 2, 1, 0), 4);
  EXPECT_NEAR(std::abs(L.entries(L.index(1), L.index(0)) - 1.5), 0, 1e-15);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(9);
  e(L.index(2)) = 1;
  const Eigen::VectorXcd Le = L.entries * e;
  for (int m = -4; m <= 4; ++m)
    if (std::abs(m - 2) > 1) {
      EXPECT_EQ(Le(L.index(m)), Complex{});
    }
}

TEST(AssembleL, RelationToHAndLargeAlphaLimit) {
  const ModeParams p = ModeParams::make(1e-3, 2, 1, 1);
  const OperatorMatrix H = assemble_H(p, 8), L = assemble_L(p, 8);
  for (int m = -8; m <= 8; ++m) {
    const double g = 1 - 1 / (p.alpha2() + double(m) * m);
    if (m < 8) {
      EXPECT_NEAR(std::abs(L.entries(L.index(m + 1), L.index(m)) - g * H.entries(H.index(m + 1), H.index(m))), 0, 1e-15);
    }
    if (m > -8) {
      EXPECT_NEAR(std::abs(L.entries(L.index(m - 1), L.index(m)) - g * H.entries(H.index(m - 1), H.index(m))), 0, 1e-15);
    }
  }
  // Large delta |k|: the nonlocal correction fades relative to the coupling.
  const ModeParams big = ModeParams::make(1e-3, 400, 1, 0);
  const OperatorMatrix Hb = assemble_H(big, 4), Lb = assemble_L(big, 4);
  EXPECT_LE((Hb.entries - Lb.entries).cwiseAbs().maxCoeff() / Hb.entries.cwiseAbs().maxCoeff(), 1e-5);
}

TEST(AssembleLLambda, QuadratureOracleAndReductions) {
  const LLambdaParams p = LLambdaParams::make(0.05, 0.3, 0.4, 1.8, 0.9);
  const int M = 5;
  const OperatorMatrix A = assemble_L_lambda(p, M);
  const double c = p.gamma / p.nu, a2 = p.alpha * p.alpha;
  for (int n = -M; n <= M; ++n)
    for (int m = -M; m <= M; ++m) {
      // i c [(sin - lambda) w + sin phi] - nu w'' with (d^2 - alpha^2) phi = w.
      const Complex ref = oracle::galerkin_entry(n, m, [&](int mm, double y) {
        const Complex w = std::polar(1.0, mm * y), phi = -w / (a2 + double(mm) * mm);
        const double s = std::sin(y + p.alpha0);
        return Complex(0, c) * ((s - p.lambda) * w + s * phi) + p.nu * double(mm) * mm * w;
      });
      EXPECT_NEAR(std::abs(A.entries(A.index(n), A.index(m)) - ref), 0, 1e-12);
    }
  const OperatorMatrix one = assemble_L_lambda(LLambdaParams::make(0.05, 0.05, 1.0, 1.8, 0.0), 3);
  EXPECT_NEAR(std::abs(one.entries(one.index(0), one.index(0)) - Complex(0, -1)), 0, 1e-15);
}

TEST(AssembleLLambda, PhaseConjugation) {
  const int M = 10;
  const OperatorMatrix A0 = assemble_L_lambda(LLambdaParams::make(0.02, 0.1, 0.3, 2.0, 0.0), M);
  const OperatorMatrix A1 = assemble_L_lambda(LLambdaParams::make(0.02, 0.1, 0.3, 2.0, 1.1), M);
  // D A0 D^{-1} with D = diag(e^{i m alpha0}) reproduces A1.
  EXPECT_LE((conjugate_by_phase(A0, 1.1).entries - A1.entries).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((conjugate_by_phase(A1, -1.1).entries - A0.entries).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(LLambdaParams, Preconditions) {
  EXPECT_THROW(LLambdaParams::make(0, 1, 0, 2, 0), PreconditionError);
  EXPECT_THROW(LLambdaParams::make(0.1, 1, 0, 1.0, 0), PreconditionError);
  EXPECT_THROW(LLambdaParams::make(0.1, 0.01, 0, 2, 0), PreconditionError);  // |gamma| < 10 nu^2
  EXPECT_THROW(LLambdaParams::make(0.1, 1, 0, 2, 7.0), PreconditionError);
  EXPECT_TRUE(LLambdaParams::make(0.1, 0.5, 0, 2, 0).weakly_separated());
  EXPECT_FALSE(LLambdaParams::make(0.1, 2, 0, 2, 0).weakly_separated());
}

TEST(StarGram, ValuesAndBounds) {
  const OperatorMatrix G = assemble_star_gram(4.0, 5);
  EXPECT_DOUBLE_EQ(G.gram(G.index(0)), 0.75);
  EXPECT_DOUBLE_EQ(G.gram(G.index(1)), 0.8);
  EXPECT_DOUBLE_EQ(G.gram.minCoeff(), 0.75);
  EXPECT_LT(G.gram.maxCoeff(), 1.0);
  EXPECT_THROW(assemble_star_gram(1.0, 5), PreconditionError);

  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(11);
  e(G.index(3)) = Complex(0, 2);
  EXPECT_NEAR(metric_norm_sq(G, e), (1 - 1 / 13.0) * 4, 1e-15);
}

TEST(Accretivity, IdentityHoldsInStarMetric) {
  std::mt19937_64 rng(17);
  const OperatorMatrix L = assemble_L(ModeParams::make(1e-3, 2, 1, 0), 32);
  EXPECT_EQ(accretivity_residual(L, Eigen::VectorXcd::Zero(L.size())), 0.0);
  Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(L.size());
  e1(L.index(1)) = 1;
  EXPECT_LE(accretivity_residual(L, e1), 1e-12);
  double worst = 0;
  for (int i = 0; i < 100; ++i) worst = std::max(worst, accretivity_residual(L, oracle::random_vector(L.size(), rng)));
  EXPECT_LE(worst, 1e-11);
  // In the euclidean metric the nonlocal factor breaks skew-adjointness.
  const OperatorMatrix Le = assemble_L(ModeParams::make(1e-3, 2, 1, 0), 32, Metric::euclidean);
  EXPECT_GT(accretivity_residual(Le, oracle::random_vector(Le.size(), rng)), 1e-6);
}

TEST(MatrixSnapshot, RoundTrip) {
  const OperatorMatrix L = assemble_L(ModeParams::make(1e-3, 2, 1, 1), 6);
  std::stringstream ss;
  write_matrix(ss, L);
  EXPECT_EQ(ss.str().substr(0, 4), "HSM1");
  const OperatorMatrix back = read_matrix(ss);
  EXPECT_EQ(back.metric, Metric::star);
  EXPECT_EQ((back.entries - L.entries).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((back.gram - L.gram).cwiseAbs().maxCoeff(), 0.0);
}
