#include "helistab/grid.hpp"

#include <cmath>
#include <numbers>

#include "helistab/error.hpp"

namespace helistab {

TorusGrid::TorusGrid(std::size_t n1, std::size_t n2, std::size_t ny, double delta)
    : n1_(n1), n2_(n2), ny_(ny), delta_(delta) {
  for (std::size_t n : {n1, n2, ny})
    require(n >= 4 && n % 2 == 0, "TorusGrid: resolutions must be even and >= 4");
  require(std::isfinite(delta) && delta >= 1.0, "TorusGrid: delta must be >= 1");
}

std::size_t TorusGrid::extent(Axis a) const {
  switch (a) {
    case Axis::x1: return n1_;
    case Axis::x2: return n2_;
    case Axis::y: return ny_;
  }
  return 0;
}

double TorusGrid::volume() const {
  constexpr double two_pi = 2 * std::numbers::pi;
  return two_pi * two_pi * two_pi * delta_;
}

ModeParams ModeParams::make(double nu, double delta, int k1, int k2) {
  require(std::isfinite(nu) && nu >= 0.0, "ModeParams: nu must be >= 0");
  require(std::isfinite(delta) && delta >= 1.0, "ModeParams: delta must be >= 1");
  return ModeParams{nu, delta, k1, k2};
}

double ModeParams::kabs() const { return std::sqrt(kabs2()); }

double ModeParams::cos_alpha_k() const {
  require(!is_zero_mode(), "ModeParams: alpha_k undefined for k = (0,0)");
  return k1 / kabs();
}

double ModeParams::sin_alpha_k() const {
  require(!is_zero_mode(), "ModeParams: alpha_k undefined for k = (0,0)");
  return k2 / kabs();
}

double ModeParams::alpha_k() const {
  require(!is_zero_mode(), "ModeParams: alpha_k undefined for k = (0,0)");
  return std::atan2(double(k2), double(k1));
}

}  // namespace helistab
