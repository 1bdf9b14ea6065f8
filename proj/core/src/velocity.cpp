#include "helistab/velocity.hpp"

#include "helistab/error.hpp"

namespace helistab {

namespace {

bool has_zero_mode_content(const SpectralField& f) {
  const double tol = 1e-13 * std::max(1.0, f.max_abs());
  bool found = false;
  f.for_each([&](std::size_t, int k1, int k2, int, const Complex& v) {
    if (k1 == 0 && k2 == 0 && std::abs(v) > tol) found = true;
  });
  return found;
}

}  // namespace

std::pair<SpectralField, SpectralField> recover_horizontal_velocity(const SpectralField& v3,
                                                                    const SpectralField& omega3) {
  require(v3.rank() == Rank::scalar && omega3.rank() == Rank::scalar,
          "recover_horizontal_velocity: scalar fields required");
  require(v3.grid() == omega3.grid(), "recover_horizontal_velocity: grid mismatch");
  require(!has_zero_mode_content(v3) && !has_zero_mode_content(omega3),
          "recover_horizontal_velocity: inputs must have no (k1,k2)=(0,0) content");

  const TorusGrid& g = v3.grid();
  SpectralField v1(g, Rank::scalar), v2(g, Rank::scalar);
  for (std::size_t i1 = 0; i1 < g.n1(); ++i1)
    for (std::size_t i2 = 0; i2 < g.n2(); ++i2) {
      const int k1 = TorusGrid::wavenumber(i1, g.n1()), k2 = TorusGrid::wavenumber(i2, g.n2());
      const double kh2 = double(k1) * k1 + double(k2) * k2;
      if (kh2 == 0) continue;
      for (std::size_t iy = 0; iy < g.ny(); ++iy) {
        const double ky = TorusGrid::wavenumber(iy, g.ny()) * g.m0();
        const Complex w = omega3.at(0, i1, i2, iy), v = v3.at(0, i1, i2, iy);
        // Delta_h^{-1} -> -1/kh2; d_x2 w -> i k2 w; d_x1 d_y v -> -k1 ky v.
        v1.at(0, i1, i2, iy) = (Complex(0, k2) * w - k1 * ky * v) / kh2;
        v2.at(0, i1, i2, iy) = -(Complex(0, k1) * w + k2 * ky * v) / kh2;
      }
    }
  return {std::move(v1), std::move(v2)};
}

}  // namespace helistab
