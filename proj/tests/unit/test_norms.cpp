#include <gtest/gtest.h>

#include <array>
#include <random>

#include <helistab/error.hpp>
#include <helistab/norms.hpp>

#include "oracles.hpp"

using namespace helistab;

namespace {

SpectralField trig_polynomial(const TorusGrid& g, std::size_t comps, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  SpectralField f(g, comps == 1 ? Rank::scalar : Rank::vector);
  for (std::size_t c = 0; c < comps; ++c)
    for (int k1 = -2; k1 <= 2; ++k1)
      for (int k2 = -2; k2 <= 2; ++k2)
        for (int m = -2; m <= 2; ++m) f.set_mode(c, k1, k2, m, Complex(n(rng), n(rng)));
  f.enforce_hermitian();
  return f;
}

// Sum over multi-indices |beta| <= 2, each counted once, by quadrature.
double h2_by_quadrature(const SpectralField& f, std::array<int, 2> extra = {0, 0}) {
  static const std::vector<std::array<int, 3>> betas = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0},
                                                        {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
  double total = 0;
  for (std::size_t c = 0; c < f.components(); ++c)
    for (const auto& b : betas)
      total += oracle::integrate(f.grid().delta(), 12, [&](double x1, double x2, double y) {
        const double v = oracle::eval_derivative(f, c, b[0] + extra[0], b[1] + extra[1], b[2], x1, x2, y);
        return v * v;
      });
  return total;
}

}  // namespace

TEST(Norms, ConstantFieldOnUnitTorus) {
  const TorusGrid g(8, 8, 8, 1.0);
  SpectralField one(g, Rank::scalar);
  one.set_mode(0, 0, 0, 0, 1.0);
  const double expected = std::sqrt(8 * oracle::pi * oracle::pi * oracle::pi);
  EXPECT_NEAR(norm_X0(one), expected, 1e-12);
  EXPECT_NEAR(norm_X0(one), 15.7496, 1e-4);
  EXPECT_EQ(norm_X0(SpectralField(g, Rank::scalar)), 0.0);
}

TEST(Norms, L2MatchesQuadrature) {
  const TorusGrid g(8, 8, 8, 1.7);
  const SpectralField f = trig_polynomial(g, 1, 3);
  const double quad = oracle::integrate(1.7, 12, [&](double a, double b, double y) {
    const double v = oracle::eval(f, 0, a, b, y);
    return v * v;
  });
  EXPECT_NEAR(norm_L2_sq(f) / quad, 1.0, 1e-10);
}

TEST(Norms, H2AndX0MatchQuadrature) {
  const TorusGrid g(8, 8, 8, 2.0);
  const SpectralField f = trig_polynomial(g, 1, 5);
  EXPECT_NEAR(norm_H2_sq(f) / h2_by_quadrature(f), 1.0, 1e-10);
  const double x0 = h2_by_quadrature(project_zero_mode(f)) + h2_by_quadrature(f, {1, 0}) + h2_by_quadrature(f, {0, 1});
  EXPECT_NEAR(norm_X0_sq(f) / x0, 1.0, 1e-10);
}

TEST(Norms, VectorNormsSumComponents) {
  const TorusGrid g(8, 8, 8, 1.0);
  const SpectralField v = trig_polynomial(g, 3, 8);
  double s = 0;
  for (std::size_t c = 0; c < 3; ++c) s += norm_H2_sq(v.component_field(c));
  EXPECT_NEAR(norm_H2_sq(v), s, 1e-10 * s);
}

TEST(Norms, PoincareOnNonzeroModes) {
  const TorusGrid g(8, 8, 8, 3.0);
  const SpectralField f = trig_polynomial(g, 1, 13);
  const double lhs = norm_L2(project_nonzero(f));
  const double rhs = norm_L2(derivative(f, Axis::x1)) + norm_L2(derivative(f, Axis::x2));
  EXPECT_LE(lhs, rhs);
}

TEST(Xed, ZeroSeriesAndConstantSeries) {
  XedAccumulator zero(0.1, 1e-2);
  zero.add(0, 0, 0);
  zero.add(1, 0, 0);
  EXPECT_EQ(zero.result().xed_sq, 0.0);

  const double nu = 1e-2, l2 = 3.0, grad = 5.0, T = 7.0;
  XedAccumulator c(0.0, nu);
  for (int i = 0; i <= 70; ++i) c.add(i * 0.1, l2, grad);
  EXPECT_NEAR(c.result().x1_sq, l2 + nu * T * grad, 1e-12);
}

TEST(Xed, DecayingSeriesSupIsInitialValue) {
  const double nu = 1e-2, eps = 0.2, a = 0.5;  // a > eps nu^1/2
  XedAccumulator acc(eps, nu);
  for (int i = 0; i <= 200; ++i) {
    const double t = 0.1 * i;
    acc.add(t, 4.0 * std::exp(-2 * a * t), 0.0);
  }
  EXPECT_DOUBLE_EQ(acc.result().sup_weighted, 4.0);
}

TEST(Xed, RejectsNonIncreasingTimes) {
  XedAccumulator acc(0.1, 1e-2);
  acc.add(1.0, 1, 1);
  EXPECT_THROW(acc.add(1.0, 1, 1), PreconditionError);
  XedAccumulator single(0.1, 1e-2);
  single.add(0, 1, 1);
  EXPECT_THROW(single.result(), PreconditionError);
}
