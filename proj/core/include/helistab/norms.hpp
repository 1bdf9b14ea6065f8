#pragma once

#include <span>
#include <utility>
#include <vector>

#include "helistab/spectral_field.hpp"

namespace helistab {

// Squared norms are sums over components. H^2 counts every multi-index
// |beta| <= 2 once, so its Fourier weight is
//   1 + |kappa|^2 + sum_i kappa_i^4 + sum_{i<j} kappa_i^2 kappa_j^2.
double h2_weight(const Wavevector& k);

double norm_L2_sq(const SpectralField& f);
double norm_H2_sq(const SpectralField& f);
double norm_X0_sq(const SpectralField& f);
double norm_L2(const SpectralField& f);
double norm_H2(const SpectralField& f);
double norm_X0(const SpectralField& f);
// || grad f ||^2 summed over components.
double norm_grad_sq(const SpectralField& f);

struct XedResult {
  double xed_sq = 0;   // sup e^{2 eps nu^1/2 t}|u|^2 + nu^1/2 int(...) + nu int(... |grad u|^2)
  double x1_sq = 0;    // sup |u|^2 + nu int |grad u|^2 (unweighted)
  double sup_weighted = 0;
  double l2_integral_weighted = 0;
  double grad_integral_weighted = 0;
};

// Running accumulator on (t, |u|^2, |grad u|^2) samples; trapezoid in time.
class XedAccumulator {
 public:
  XedAccumulator(double epsilon, double nu);
  void add(double t, double l2_sq, double grad_sq);
  std::size_t samples() const { return n_; }
  XedResult result() const;

 private:
  double eps_, nu_;
  std::size_t n_ = 0;
  double t_prev_ = 0, l2w_prev_ = 0, gradw_prev_ = 0, grad_prev_ = 0;
  double sup_w_ = 0, sup_ = 0, int_l2w_ = 0, int_gradw_ = 0, int_grad_ = 0;
};

XedResult xed_accumulator(std::span<const std::pair<double, SpectralField>> series,
                          double epsilon, double nu);

}  // namespace helistab
