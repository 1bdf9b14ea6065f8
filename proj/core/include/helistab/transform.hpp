#pragma once

#include <memory>
#include <string>
#include <span>
#include <vector>

#include "helistab/spectral_field.hpp"

namespace helistab {

// Grid-point values of a real scalar field, row-major over (x1, x2, y).
struct PhysicalField {
  TorusGrid grid;
  std::vector<double> values;

  explicit PhysicalField(const TorusGrid& g) : grid(g), values(g.points()) {}
  double& operator()(std::size_t i1, std::size_t i2, std::size_t iy) {
    return values[(i1 * grid.n2() + i2) * grid.ny() + iy];
  }
  double operator()(std::size_t i1, std::size_t i2, std::size_t iy) const {
    return values[(i1 * grid.n2() + i2) * grid.ny() + iy];
  }
};

enum class PlanEffort { estimate, measure };

// Real-to-complex FFT pair bound to one grid. Owns its work buffers, so a
// single instance must not be shared across threads; separate instances may.
class SpectralTransform {
 public:
  explicit SpectralTransform(const TorusGrid& grid, PlanEffort effort = PlanEffort::estimate);
  ~SpectralTransform();
  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  const TorusGrid& grid() const { return grid_; }
  std::size_t half_ny() const { return grid_.ny() / 2 + 1; }

  // Half-spectrum layout (i1, i2, iy <= ny/2), coefficients mean-normalized.
  void to_physical_half(std::span<const Complex> half, std::span<double> out);
  void to_spectral_half(std::span<const double> in, std::span<Complex> half);

  // Full-spectrum scalar component c of f.
  void to_physical(const SpectralField& f, std::size_t c, std::span<double> out);
  void to_spectral(std::span<const double> in, SpectralField& f, std::size_t c);

 private:
  struct Plans;
  TorusGrid grid_;
  std::unique_ptr<Plans> plans_;
};

PhysicalField to_physical(const SpectralField& f, std::size_t component = 0);
SpectralField to_spectral(const PhysicalField& p);
// Pointwise product of two scalar fields via the grid (no dealiasing).
// Version string of the FFT backend.
std::string fft_backend_version();

SpectralField multiply(const SpectralField& a, const SpectralField& b);

}  // namespace helistab
