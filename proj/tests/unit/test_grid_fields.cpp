#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <helistab/error.hpp>
#include <helistab/norms.hpp>
#include <helistab/snapshot.hpp>
#include <helistab/spectral_field.hpp>
#include <helistab/transform.hpp>
#include <helistab/velocity.hpp>

#include "oracles.hpp"

using namespace helistab;

namespace {

SpectralField random_field(const TorusGrid& g, Rank r, int band, unsigned seed, bool zero_modes = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  SpectralField f(g, r);
  for (std::size_t c = 0; c < f.components(); ++c)
    for (int k1 = -band; k1 <= band; ++k1)
      for (int k2 = -band; k2 <= band; ++k2)
        for (int m = -band; m <= band; ++m) {
          if (!zero_modes && k1 == 0 && k2 == 0) continue;
          f.set_mode(c, k1, k2, m, Complex(n(rng), n(rng)));
        }
  f.enforce_hermitian();
  return f;
}

double max_diff(const SpectralField& a, const SpectralField& b) { return (a - b).max_abs(); }

}  // namespace

TEST(TorusGrid, RejectsOddOrSmallResolutionsAndThinBoxes) {
  EXPECT_THROW(TorusGrid(6, 8, 7, 1.0), PreconditionError);
  EXPECT_THROW(TorusGrid(2, 8, 8, 1.0), PreconditionError);
  EXPECT_THROW(TorusGrid(8, 8, 8, 0.5), PreconditionError);
  EXPECT_NO_THROW(TorusGrid(4, 6, 8, 1.0));
}

TEST(TorusGrid, WavenumberRoundTripAndCutoff) {
  for (std::size_t n : {4u, 8u, 32u})
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(TorusGrid::fft_index(TorusGrid::wavenumber(i, n), n), i);
  EXPECT_EQ(TorusGrid::dealias_cutoff(32), 10);
  EXPECT_EQ(TorusGrid::dealias_cutoff(16), 5);
}

TEST(ModeParams, DerivedQuantities) {
  const ModeParams p = ModeParams::make(1e-3, 2.0, 3, -4);
  EXPECT_DOUBLE_EQ(p.alpha2(), 25.0 * 4.0);
  EXPECT_NEAR(p.cos_alpha_k() * p.cos_alpha_k() + p.sin_alpha_k() * p.sin_alpha_k(), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(p.m0(), 0.5);
  EXPECT_THROW(ModeParams::make(1e-3, 2.0, 0, 0).alpha_k(), PreconditionError);
}

TEST(SpectralField, SetModeKeepsFieldReal) {
  const TorusGrid g(8, 8, 8, 1.5);
  SpectralField f(g, Rank::scalar);
  f.set_mode(0, 1, -2, 3, Complex(0.3, -0.7));
  EXPECT_EQ(f.coeff(0, -1, 2, -3), Complex(0.3, 0.7));
  EXPECT_EQ(f.hermitian_defect(), 0.0);
}

TEST(Projections, ZeroModeExamples) {
  const TorusGrid g(8, 8, 8, 2.0);
  SpectralField f(g, Rank::scalar);
  f.set_mode(0, 1, 0, 0, 0.5);       // part of sin/cos(x1)
  f.set_mode(0, 0, 0, 1, 0.5);       // cos(m0 y)
  const SpectralField p0 = project_zero_mode(f);
  for (double y : {0.0, 1.0, 4.0})
    EXPECT_NEAR(oracle::eval(p0, 0, 0.3, 1.1, y), std::cos(0.5 * y), 1e-14);
  SpectralField only_x1(g, Rank::scalar);
  only_x1.set_mode(0, 1, 0, 0, 1.0);
  EXPECT_EQ(project_zero_mode(only_x1).max_abs(), 0.0);
  SpectralField constant(g, Rank::scalar);
  constant.set_mode(0, 0, 0, 0, 2.5);
  EXPECT_EQ(max_diff(project_zero_mode(constant), constant), 0.0);
  EXPECT_EQ(project_nonzero(constant).max_abs(), 0.0);
}

TEST(Projections, PartitionIdempotenceAndDerivativeCommutation) {
  const TorusGrid g(8, 8, 8, 1.0);
  const SpectralField f = random_field(g, Rank::scalar, 3, 4);
  const SpectralField p0 = project_zero_mode(f), pn = project_nonzero(f);
  EXPECT_LE(max_diff(p0 + pn, f), 1e-14);
  EXPECT_LE(max_diff(project_zero_mode(p0), p0), 0.0);
  EXPECT_EQ(project_zero_mode(pn).max_abs(), 0.0);
  EXPECT_EQ(derivative(p0, Axis::x1).max_abs(), 0.0);
  EXPECT_EQ(derivative(p0, Axis::x2).max_abs(), 0.0);
  EXPECT_LE(max_diff(derivative(pn, Axis::x1), derivative(f, Axis::x1)), 1e-14);
}

TEST(Derivative, Examples) {
  const double delta = 3.0, m0 = 1 / delta;
  const TorusGrid g(8, 8, 16, delta);
  SpectralField e(g, Rank::scalar);
  e.coeff_ref(0, 0, 0, 1) = 1.0;  // e^{i m0 y}, complex on purpose
  EXPECT_LE(std::abs(derivative(e, Axis::y).coeff(0, 0, 0, 1) - Complex(0, m0)), 1e-15);

  SpectralField s(g, Rank::scalar);
  s.set_mode(0, 1, 0, 0, Complex(0, -0.5));  // sin(x1)
  const SpectralField ls = laplacian(s);
  EXPECT_NEAR(oracle::eval(ls, 0, 0.7, 0, 0), -std::sin(0.7), 1e-14);

  SpectralField c(g, Rank::scalar);
  c.set_mode(0, 0, 0, 1, 0.5);  // cos(m0 y)
  const SpectralField cyy = derivative(c, Axis::y, 2);
  EXPECT_NEAR(oracle::eval(cyy, 0, 0, 0, 1.3), -m0 * m0 * std::cos(m0 * 1.3), 1e-14);
}

TEST(Leray, Examples) {
  const TorusGrid g(8, 8, 8, 2.0);
  SpectralField v(g, Rank::vector);
  v.set_mode(0, 1, 0, 0, Complex(0, -0.5));  // (sin x1, 0, 0) is a gradient
  EXPECT_LE(leray_project(v).max_abs(), 1e-16);

  const SpectralField r = random_field(g, Rank::vector, 3, 9);
  const SpectralField p = leray_project(r);
  EXPECT_LE(max_divergence(p), 1e-14);
  EXPECT_LE(max_diff(leray_project(p), p), 1e-14);
  EXPECT_LE(norm_L2(p), norm_L2(r) * (1 + 1e-14));
  // The mean flow passes through.
  EXPECT_EQ(p.coeff(1, 0, 0, 0), r.coeff(1, 0, 0, 0));
}

TEST(Transform, RoundTripAndMeanNormalization) {
  const TorusGrid g(8, 6, 10, 1.7);
  const SpectralField f = random_field(g, Rank::scalar, 2, 5);
  const PhysicalField p = to_physical(f);
  // Point values against direct summation.
  const double x1 = 2 * oracle::pi * 3 / 8, x2 = 2 * oracle::pi * 5 / 6, y = 2 * oracle::pi * 1.7 * 7 / 10;
  EXPECT_NEAR(p(3, 5, 7), oracle::eval(f, 0, x1, x2, y), 1e-12);
  EXPECT_LE(max_diff(to_spectral(p), f), 1e-14);

  PhysicalField ones(g);
  std::fill(ones.values.begin(), ones.values.end(), 2.0);
  EXPECT_NEAR(to_spectral(ones).coeff(0, 0, 0, 0).real(), 2.0, 1e-15);
}

TEST(Transform, ProductMatchesPointwise) {
  const TorusGrid g(16, 16, 16, 1.0);
  const SpectralField a = random_field(g, Rank::scalar, 2, 1), b = random_field(g, Rank::scalar, 2, 2);
  const SpectralField ab = multiply(a, b);
  for (auto [x1, x2, y] : {std::tuple{0.3, 1.2, 2.1}, std::tuple{4.0, 0.1, 5.5}})
    EXPECT_NEAR(oracle::eval(ab, 0, x1, x2, y), oracle::eval(a, 0, x1, x2, y) * oracle::eval(b, 0, x1, x2, y),
                1e-10);
}

TEST(Recovery, SingleModeInversion) {
  const TorusGrid g(8, 8, 8, 2.0);
  SpectralField v3(g, Rank::scalar), w3(g, Rank::scalar);
  w3.coeff_ref(0, 1, 0, 0) = 1.0;  // omega3 = e^{i x1}
  const auto [v1, v2] = recover_horizontal_velocity(v3, w3);
  EXPECT_LE(v1.max_abs(), 1e-16);
  EXPECT_LE(std::abs(v2.coeff(0, 1, 0, 0) - Complex(0, -1)), 1e-15);
}

TEST(Recovery, RandomFieldsAreDivergenceFreeWithMatchingVorticity) {
  const TorusGrid g(16, 16, 16, 1.5);
  const SpectralField v3 = random_field(g, Rank::scalar, 3, 11, false);
  const SpectralField w3 = random_field(g, Rank::scalar, 3, 12, false);
  const auto [v1, v2] = recover_horizontal_velocity(v3, w3);
  const SpectralField V = SpectralField::vector_from(v1, v2, v3);
  EXPECT_LE(max_divergence(V), 1e-12);
  const SpectralField w = derivative(v2, Axis::x1) - derivative(v1, Axis::x2);
  EXPECT_LE(max_diff(w, w3), 1e-12);

  SpectralField with_mean = v3;
  with_mean.set_mode(0, 0, 0, 1, 1.0);
  EXPECT_THROW(recover_horizontal_velocity(with_mean, w3), PreconditionError);
}

TEST(Snapshot, FieldRoundTripAndHeader) {
  const TorusGrid g(4, 6, 8, 2.5);
  const SpectralField f = random_field(g, Rank::vector, 1, 3);
  std::stringstream ss;
  write_snapshot(ss, f);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.substr(0, 4), "HSF1");
  EXPECT_EQ(bytes.size(), 4 + 8 * 3 + 8 + 8 + 16 * 3 * g.points());
  const SpectralField back = read_snapshot(ss);
  EXPECT_EQ(back.grid(), g);
  EXPECT_EQ(max_diff(back, f), 0.0);

  std::stringstream bad("HSF2xxxxxxxx");
  EXPECT_ANY_THROW(read_snapshot(bad));
}
