#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "helistab/grid.hpp"

namespace helistab {

enum class Rank : std::size_t { scalar = 1, vector = 3 };

// Fourier coefficients of a real field on the torus. Coefficient (0,0,0) is the
// mean; y-modes are e^{i m m0 y}. Storage is component-major, then row-major
// over FFT indices (i1, i2, iy).
class SpectralField {
 public:
  SpectralField(const TorusGrid& grid, Rank rank);

  const TorusGrid& grid() const { return grid_; }
  Rank rank() const { return rank_; }
  std::size_t components() const { return static_cast<std::size_t>(rank_); }
  std::size_t modes() const { return grid_.points(); }

  std::size_t offset(std::size_t c, std::size_t i1, std::size_t i2, std::size_t iy) const {
    return ((c * grid_.n1() + i1) * grid_.n2() + i2) * grid_.ny() + iy;
  }
  Complex& at(std::size_t c, std::size_t i1, std::size_t i2, std::size_t iy) {
    return data_[offset(c, i1, i2, iy)];
  }
  const Complex& at(std::size_t c, std::size_t i1, std::size_t i2, std::size_t iy) const {
    return data_[offset(c, i1, i2, iy)];
  }

  // Access by signed wavenumbers.
  Complex coeff(std::size_t c, int k1, int k2, int m) const;
  Complex& coeff_ref(std::size_t c, int k1, int k2, int m);
  // Sets (k1,k2,m) and its Hermitian partner so the field stays real.
  void set_mode(std::size_t c, int k1, int k2, int m, Complex v);

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }
  std::span<Complex> component(std::size_t c);
  std::span<const Complex> component(std::size_t c) const;

  SpectralField component_field(std::size_t c) const;
  static SpectralField vector_from(const SpectralField& a, const SpectralField& b,
                                   const SpectralField& c);

  // Calls f(c, k1, k2, m, value&) for every stored coefficient.
  template <class F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  SpectralField& axpy(Complex a, const SpectralField& x);  // this += a x
  SpectralField& axpy(double a, const SpectralField& x);

  double max_abs() const;
  // Largest |c(k) - conj(c(-k))|.
  double hermitian_defect() const;
  void enforce_hermitian();
  void set_zero();

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    const auto& g = self.grid_;
    std::size_t idx = 0;
    for (std::size_t c = 0; c < self.components(); ++c)
      for (std::size_t i1 = 0; i1 < g.n1(); ++i1) {
        const int k1 = TorusGrid::wavenumber(i1, g.n1());
        for (std::size_t i2 = 0; i2 < g.n2(); ++i2) {
          const int k2 = TorusGrid::wavenumber(i2, g.n2());
          for (std::size_t iy = 0; iy < g.ny(); ++iy, ++idx)
            f(c, k1, k2, TorusGrid::wavenumber(iy, g.ny()), self.data_[idx]);
        }
      }
  }

  TorusGrid grid_;
  Rank rank_;
  std::vector<Complex> data_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// Horizontal average P0 and its complement.
SpectralField project_zero_mode(const SpectralField& f);
SpectralField project_nonzero(const SpectralField& f);

// Multiplies by (i k)^order along the axis; Nyquist coefficients are zeroed for odd orders.
SpectralField derivative(const SpectralField& f, Axis axis, int order = 1);
SpectralField laplacian(const SpectralField& f);
SpectralField horizontal_laplacian(const SpectralField& f);
// Inverse Laplacian; the (0,0,0) mode maps to zero.
SpectralField inverse_laplacian(const SpectralField& f);

// Physical wavevector of a mode.
struct Wavevector {
  double k1, k2, ky;
  double norm2() const { return k1 * k1 + k2 * k2 + ky * ky; }
};
inline Wavevector wavevector(const TorusGrid& g, int k1, int k2, int m) {
  return {double(k1), double(k2), m * g.m0()};
}

SpectralField leray_project(const SpectralField& v);
SpectralField divergence(const SpectralField& v);
SpectralField curl(const SpectralField& v);
// max over modes of |kappa . v_hat| (physical derivative units).
double max_divergence(const SpectralField& v);

}  // namespace helistab
