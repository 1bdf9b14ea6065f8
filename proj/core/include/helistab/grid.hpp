#pragma once

#include <complex>
#include <cstddef>

namespace helistab {

using Complex = std::complex<double>;

enum class Axis { x1, x2, y };

// Periodic box T_{2pi} x T_{2pi} x T_{2pi delta}.
class TorusGrid {
 public:
  TorusGrid(std::size_t n1, std::size_t n2, std::size_t ny, double delta);

  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  std::size_t ny() const { return ny_; }
  std::size_t points() const { return n1_ * n2_ * ny_; }
  std::size_t extent(Axis a) const;
  double delta() const { return delta_; }
  double m0() const { return 1.0 / delta_; }
  double volume() const;

  // Signed wavenumber of FFT index i on an axis with n points (Nyquist -> -n/2).
  static int wavenumber(std::size_t i, std::size_t n) {
    return i < n / 2 ? static_cast<int>(i) : static_cast<int>(i) - static_cast<int>(n);
  }
  static std::size_t fft_index(int k, std::size_t n) {
    return k >= 0 ? static_cast<std::size_t>(k) : static_cast<std::size_t>(static_cast<long>(n) + k);
  }
  // Largest integer wavenumber kept by the 2/3 rule: 3K < n.
  static int dealias_cutoff(std::size_t n) { return static_cast<int>((n - 1) / 3); }

  bool operator==(const TorusGrid&) const = default;

 private:
  std::size_t n1_, n2_, ny_;
  double delta_;
};

// Parameters of one horizontal Fourier mode (k1, k2) of the reduced problem.
struct ModeParams {
  double nu = 0;
  double delta = 1;
  int k1 = 0;
  int k2 = 0;

  // Validates nu > 0 (nu == 0 allowed for advection-only assembly) and delta >= 1.
  static ModeParams make(double nu, double delta, int k1, int k2);

  double m0() const { return 1.0 / delta; }
  double kabs2() const { return double(k1) * k1 + double(k2) * k2; }
  double kabs() const;
  double alpha2() const { return kabs2() * delta * delta; }
  double cos_alpha_k() const;
  double sin_alpha_k() const;
  double alpha_k() const;
  bool is_zero_mode() const { return k1 == 0 && k2 == 0; }
};

}  // namespace helistab
