#include "helistab/transform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "helistab/error.hpp"

namespace helistab {

namespace {
// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SpectralTransform::Plans {
  double* real = nullptr;
  fftw_complex* half = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

SpectralTransform::SpectralTransform(const TorusGrid& grid, PlanEffort effort)
    : grid_(grid), plans_(std::make_unique<Plans>()) {
  const int n1 = int(grid.n1()), n2 = int(grid.n2()), ny = int(grid.ny());
  const std::size_t nhalf = grid.n1() * grid.n2() * half_ny();
  std::lock_guard lock(planner_mutex());
  plans_->real = fftw_alloc_real(grid.points());
  plans_->half = fftw_alloc_complex(nhalf);
  const unsigned flags = effort == PlanEffort::measure ? FFTW_MEASURE : FFTW_ESTIMATE;
  plans_->forward = fftw_plan_dft_r2c_3d(n1, n2, ny, plans_->real, plans_->half, flags);
  plans_->backward = fftw_plan_dft_c2r_3d(n1, n2, ny, plans_->half, plans_->real, flags);
  if (!plans_->forward || !plans_->backward) throw NumericalError("FFTW planning failed");
}

SpectralTransform::~SpectralTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->forward);
  fftw_destroy_plan(plans_->backward);
  fftw_free(plans_->real);
  fftw_free(plans_->half);
}

void SpectralTransform::to_physical_half(std::span<const Complex> half, std::span<double> out) {
  const std::size_t nhalf = grid_.n1() * grid_.n2() * half_ny();
  require(half.size() == nhalf && out.size() == grid_.points(), "to_physical_half: size mismatch");
  std::memcpy(plans_->half, half.data(), nhalf * sizeof(Complex));
  fftw_execute(plans_->backward);
  std::memcpy(out.data(), plans_->real, out.size() * sizeof(double));
}

void SpectralTransform::to_spectral_half(std::span<const double> in, std::span<Complex> half) {
  const std::size_t nhalf = grid_.n1() * grid_.n2() * half_ny();
  require(half.size() == nhalf && in.size() == grid_.points(), "to_spectral_half: size mismatch");
  std::memcpy(plans_->real, in.data(), in.size() * sizeof(double));
  fftw_execute(plans_->forward);
  const double scale = 1.0 / double(grid_.points());
  auto* src = reinterpret_cast<const Complex*>(plans_->half);
  for (std::size_t i = 0; i < nhalf; ++i) half[i] = src[i] * scale;
}

void SpectralTransform::to_physical(const SpectralField& f, std::size_t c, std::span<double> out) {
  require(f.grid() == grid_, "to_physical: grid mismatch");
  const std::size_t hy = half_ny();
  auto* dst = reinterpret_cast<Complex*>(plans_->half);
  for (std::size_t i1 = 0; i1 < grid_.n1(); ++i1)
    for (std::size_t i2 = 0; i2 < grid_.n2(); ++i2)
      std::copy_n(&f.at(c, i1, i2, 0), hy, dst + (i1 * grid_.n2() + i2) * hy);
  fftw_execute(plans_->backward);
  std::memcpy(out.data(), plans_->real, grid_.points() * sizeof(double));
}

void SpectralTransform::to_spectral(std::span<const double> in, SpectralField& f, std::size_t c) {
  require(f.grid() == grid_ && in.size() == grid_.points(), "to_spectral: shape mismatch");
  std::memcpy(plans_->real, in.data(), in.size() * sizeof(double));
  fftw_execute(plans_->forward);
  const double scale = 1.0 / double(grid_.points());
  const std::size_t n1 = grid_.n1(), n2 = grid_.n2(), ny = grid_.ny(), hy = half_ny();
  auto* src = reinterpret_cast<const Complex*>(plans_->half);
  for (std::size_t i1 = 0; i1 < n1; ++i1)
    for (std::size_t i2 = 0; i2 < n2; ++i2) {
      const Complex* row = src + (i1 * n2 + i2) * hy;
      for (std::size_t iy = 0; iy < hy; ++iy) f.at(c, i1, i2, iy) = row[iy] * scale;
      // Upper half from the Hermitian partner.
      const Complex* mirror = src + (((n1 - i1) % n1) * n2 + (n2 - i2) % n2) * hy;
      for (std::size_t iy = hy; iy < ny; ++iy) f.at(c, i1, i2, iy) = std::conj(mirror[ny - iy]) * scale;
    }
}

PhysicalField to_physical(const SpectralField& f, std::size_t component) {
  SpectralTransform t(f.grid());
  PhysicalField p(f.grid());
  t.to_physical(f, component, p.values);
  return p;
}

SpectralField to_spectral(const PhysicalField& p) {
  SpectralTransform t(p.grid);
  SpectralField f(p.grid, Rank::scalar);
  t.to_spectral(p.values, f, 0);
  return f;
}

std::string fft_backend_version() { return fftw_version; }

SpectralField multiply(const SpectralField& a, const SpectralField& b) {
  require(a.rank() == Rank::scalar && b.rank() == Rank::scalar, "multiply: scalar fields required");
  require(a.grid() == b.grid(), "multiply: grid mismatch");
  SpectralTransform t(a.grid());
  std::vector<double> pa(a.grid().points()), pb(a.grid().points());
  t.to_physical(a, 0, pa);
  t.to_physical(b, 0, pb);
  for (std::size_t i = 0; i < pa.size(); ++i) pa[i] *= pb[i];
  SpectralField out(a.grid(), Rank::scalar);
  t.to_spectral(pa, out, 0);
  return out;
}

}  // namespace helistab
