#include "helistab/spectral_field.hpp"

#include <algorithm>
#include <cmath>

#include "helistab/error.hpp"

namespace helistab {

namespace {

bool is_nyquist(int k, std::size_t n) { return k == -static_cast<int>(n / 2); }

void require_same_shape(const SpectralField& a, const SpectralField& b) {
  require(a.grid() == b.grid() && a.rank() == b.rank(), "SpectralField: shape mismatch");
}

}  // namespace

SpectralField::SpectralField(const TorusGrid& grid, Rank rank)
    : grid_(grid), rank_(rank), data_(grid.points() * static_cast<std::size_t>(rank)) {}

Complex SpectralField::coeff(std::size_t c, int k1, int k2, int m) const {
  return at(c, TorusGrid::fft_index(k1, grid_.n1()), TorusGrid::fft_index(k2, grid_.n2()),
            TorusGrid::fft_index(m, grid_.ny()));
}

Complex& SpectralField::coeff_ref(std::size_t c, int k1, int k2, int m) {
  return at(c, TorusGrid::fft_index(k1, grid_.n1()), TorusGrid::fft_index(k2, grid_.n2()),
            TorusGrid::fft_index(m, grid_.ny()));
}

void SpectralField::set_mode(std::size_t c, int k1, int k2, int m, Complex v) {
  require(std::abs(k1) < int(grid_.n1() / 2) && std::abs(k2) < int(grid_.n2() / 2) &&
              std::abs(m) < int(grid_.ny() / 2),
          "set_mode: wavenumber outside the resolved band");
  if (k1 == 0 && k2 == 0 && m == 0) {
    coeff_ref(c, 0, 0, 0) = v.real();
    return;
  }
  coeff_ref(c, k1, k2, m) = v;
  coeff_ref(c, -k1, -k2, -m) = std::conj(v);
}

std::span<Complex> SpectralField::component(std::size_t c) {
  return std::span<Complex>(data_).subspan(c * modes(), modes());
}

std::span<const Complex> SpectralField::component(std::size_t c) const {
  return std::span<const Complex>(data_).subspan(c * modes(), modes());
}

SpectralField SpectralField::component_field(std::size_t c) const {
  require(c < components(), "component_field: index out of range");
  SpectralField out(grid_, Rank::scalar);
  std::ranges::copy(component(c), out.data_.begin());
  return out;
}

SpectralField SpectralField::vector_from(const SpectralField& a, const SpectralField& b,
                                         const SpectralField& c) {
  require(a.rank() == Rank::scalar && b.rank() == Rank::scalar && c.rank() == Rank::scalar,
          "vector_from: scalar inputs required");
  require(a.grid() == b.grid() && b.grid() == c.grid(), "vector_from: grid mismatch");
  SpectralField out(a.grid(), Rank::vector);
  std::ranges::copy(a.data_, out.component(0).begin());
  std::ranges::copy(b.data_, out.component(1).begin());
  std::ranges::copy(c.data_, out.component(2).begin());
  return out;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

SpectralField& SpectralField::axpy(Complex a, const SpectralField& x) {
  require_same_shape(*this, x);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
  return *this;
}

SpectralField& SpectralField::axpy(double a, const SpectralField& x) {
  require_same_shape(*this, x);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
  return *this;
}

double SpectralField::max_abs() const {
  double m = 0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double SpectralField::hermitian_defect() const {
  double d = 0;
  for (std::size_t c = 0; c < components(); ++c)
    for (std::size_t i1 = 0; i1 < grid_.n1(); ++i1)
      for (std::size_t i2 = 0; i2 < grid_.n2(); ++i2)
        for (std::size_t iy = 0; iy < grid_.ny(); ++iy) {
          const std::size_t j1 = (grid_.n1() - i1) % grid_.n1();
          const std::size_t j2 = (grid_.n2() - i2) % grid_.n2();
          const std::size_t jy = (grid_.ny() - iy) % grid_.ny();
          d = std::max(d, std::abs(at(c, i1, i2, iy) - std::conj(at(c, j1, j2, jy))));
        }
  return d;
}

void SpectralField::enforce_hermitian() {
  for (std::size_t c = 0; c < components(); ++c)
    for (std::size_t i1 = 0; i1 < grid_.n1(); ++i1)
      for (std::size_t i2 = 0; i2 < grid_.n2(); ++i2)
        for (std::size_t iy = 0; iy < grid_.ny(); ++iy) {
          const std::size_t j1 = (grid_.n1() - i1) % grid_.n1();
          const std::size_t j2 = (grid_.n2() - i2) % grid_.n2();
          const std::size_t jy = (grid_.ny() - iy) % grid_.ny();
          const std::size_t a = offset(c, i1, i2, iy), b = offset(c, j1, j2, jy);
          if (b < a) continue;
          const Complex avg = 0.5 * (data_[a] + std::conj(data_[b]));
          data_[a] = avg;
          data_[b] = std::conj(avg);
        }
}

void SpectralField::set_zero() { std::ranges::fill(data_, Complex{}); }

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField project_zero_mode(const SpectralField& f) {
  SpectralField out = f;
  out.for_each([](std::size_t, int k1, int k2, int, Complex& v) {
    if (k1 != 0 || k2 != 0) v = 0;
  });
  return out;
}

SpectralField project_nonzero(const SpectralField& f) {
  SpectralField out = f;
  out.for_each([](std::size_t, int k1, int k2, int, Complex& v) {
    if (k1 == 0 && k2 == 0) v = 0;
  });
  return out;
}

SpectralField derivative(const SpectralField& f, Axis axis, int order) {
  require(order >= 1, "derivative: order must be >= 1");
  const TorusGrid& g = f.grid();
  const std::size_t n = g.extent(axis);
  SpectralField out = f;
  out.for_each([&](std::size_t, int k1, int k2, int m, Complex& v) {
    const int k = axis == Axis::x1 ? k1 : axis == Axis::x2 ? k2 : m;
    if (is_nyquist(k, n) && order % 2 == 1) {
      v = 0;
      return;
    }
    const double kk = axis == Axis::y ? m * g.m0() : double(k);
    v *= std::pow(Complex(0, kk), order);
  });
  return out;
}

SpectralField laplacian(const SpectralField& f) {
  SpectralField out = f;
  const TorusGrid g = f.grid();
  out.for_each([&](std::size_t, int k1, int k2, int m, Complex& v) {
    v *= -wavevector(g, k1, k2, m).norm2();
  });
  return out;
}

SpectralField horizontal_laplacian(const SpectralField& f) {
  SpectralField out = f;
  out.for_each([](std::size_t, int k1, int k2, int, Complex& v) {
    v *= -(double(k1) * k1 + double(k2) * k2);
  });
  return out;
}

SpectralField inverse_laplacian(const SpectralField& f) {
  SpectralField out = f;
  const TorusGrid g = f.grid();
  out.for_each([&](std::size_t, int k1, int k2, int m, Complex& v) {
    const double k2n = wavevector(g, k1, k2, m).norm2();
    v = k2n == 0 ? Complex{} : -v / k2n;
  });
  return out;
}

SpectralField leray_project(const SpectralField& v) {
  require(v.rank() == Rank::vector, "leray_project: vector field required");
  const TorusGrid& g = v.grid();
  SpectralField out = v;
  for (std::size_t i1 = 0; i1 < g.n1(); ++i1)
    for (std::size_t i2 = 0; i2 < g.n2(); ++i2)
      for (std::size_t iy = 0; iy < g.ny(); ++iy) {
        const auto kv = wavevector(g, TorusGrid::wavenumber(i1, g.n1()),
                                   TorusGrid::wavenumber(i2, g.n2()),
                                   TorusGrid::wavenumber(iy, g.ny()));
        const double k2n = kv.norm2();
        if (k2n == 0) continue;
        const double kk[3] = {kv.k1, kv.k2, kv.ky};
        Complex dot = 0;
        for (std::size_t c = 0; c < 3; ++c) dot += kk[c] * out.at(c, i1, i2, iy);
        for (std::size_t c = 0; c < 3; ++c) out.at(c, i1, i2, iy) -= kk[c] * dot / k2n;
      }
  return out;
}

SpectralField divergence(const SpectralField& v) {
  require(v.rank() == Rank::vector, "divergence: vector field required");
  SpectralField d = derivative(v.component_field(0), Axis::x1);
  d += derivative(v.component_field(1), Axis::x2);
  d += derivative(v.component_field(2), Axis::y);
  return d;
}

SpectralField curl(const SpectralField& v) {
  require(v.rank() == Rank::vector, "curl: vector field required");
  const auto v1 = v.component_field(0), v2 = v.component_field(1), v3 = v.component_field(2);
  return SpectralField::vector_from(derivative(v3, Axis::x2) - derivative(v2, Axis::y),
                                    derivative(v1, Axis::y) - derivative(v3, Axis::x1),
                                    derivative(v2, Axis::x1) - derivative(v1, Axis::x2));
}

double max_divergence(const SpectralField& v) {
  require(v.rank() == Rank::vector, "max_divergence: vector field required");
  const TorusGrid& g = v.grid();
  double worst = 0;
  for (std::size_t i1 = 0; i1 < g.n1(); ++i1)
    for (std::size_t i2 = 0; i2 < g.n2(); ++i2)
      for (std::size_t iy = 0; iy < g.ny(); ++iy) {
        const auto kv = wavevector(g, TorusGrid::wavenumber(i1, g.n1()),
                                   TorusGrid::wavenumber(i2, g.n2()),
                                   TorusGrid::wavenumber(iy, g.ny()));
        const Complex d = kv.k1 * v.at(0, i1, i2, iy) + kv.k2 * v.at(1, i1, i2, iy) +
                          kv.ky * v.at(2, i1, i2, iy);
        worst = std::max(worst, std::abs(d));
      }
  return worst;
}

}  // namespace helistab
