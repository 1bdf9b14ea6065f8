#include "helistab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "helistab/error.hpp"

namespace helistab {

namespace {

template <class W>
double weighted_sum(const SpectralField& f, W&& weight) {
  const TorusGrid& g = f.grid();
  double s = 0;
  f.for_each([&](std::size_t, int k1, int k2, int m, const Complex& v) {
    s += weight(wavevector(g, k1, k2, m)) * std::norm(v);
  });
  return s * g.volume();
}

}  // namespace

double h2_weight(const Wavevector& k) {
  const double a = k.k1 * k.k1, b = k.k2 * k.k2, c = k.ky * k.ky;
  return 1 + a + b + c + a * a + b * b + c * c + a * b + a * c + b * c;
}

double norm_L2_sq(const SpectralField& f) {
  return weighted_sum(f, [](const Wavevector&) { return 1.0; });
}

double norm_H2_sq(const SpectralField& f) { return weighted_sum(f, h2_weight); }

double norm_X0_sq(const SpectralField& f) {
  return weighted_sum(f, [](const Wavevector& k) {
    const double zero = (k.k1 == 0 && k.k2 == 0) ? 1.0 : 0.0;
    return (zero + k.k1 * k.k1 + k.k2 * k.k2) * h2_weight(k);
  });
}

double norm_grad_sq(const SpectralField& f) {
  return weighted_sum(f, [](const Wavevector& k) { return k.norm2(); });
}

double norm_L2(const SpectralField& f) { return std::sqrt(norm_L2_sq(f)); }
double norm_H2(const SpectralField& f) { return std::sqrt(norm_H2_sq(f)); }
double norm_X0(const SpectralField& f) { return std::sqrt(norm_X0_sq(f)); }

XedAccumulator::XedAccumulator(double epsilon, double nu) : eps_(epsilon), nu_(nu) {
  require(epsilon >= 0 && std::isfinite(epsilon), "XedAccumulator: epsilon must be >= 0");
  require(nu > 0 && std::isfinite(nu), "XedAccumulator: nu must be > 0");
}

void XedAccumulator::add(double t, double l2_sq, double grad_sq) {
  require(n_ == 0 || t > t_prev_, "XedAccumulator: time stamps must be strictly increasing");
  const double w = std::exp(2 * eps_ * std::sqrt(nu_) * t);
  const double l2w = w * l2_sq, gradw = w * grad_sq;
  if (n_ > 0) {
    const double h = t - t_prev_;
    int_l2w_ += 0.5 * h * (l2w + l2w_prev_);
    int_gradw_ += 0.5 * h * (gradw + gradw_prev_);
    int_grad_ += 0.5 * h * (grad_sq + grad_prev_);
  }
  sup_w_ = std::max(sup_w_, l2w);
  sup_ = std::max(sup_, l2_sq);
  t_prev_ = t;
  l2w_prev_ = l2w;
  gradw_prev_ = gradw;
  grad_prev_ = grad_sq;
  ++n_;
}

XedResult XedAccumulator::result() const {
  require(n_ >= 2, "XedAccumulator: at least two samples required");
  XedResult r;
  r.sup_weighted = sup_w_;
  r.l2_integral_weighted = int_l2w_;
  r.grad_integral_weighted = int_gradw_;
  r.xed_sq = sup_w_ + std::sqrt(nu_) * int_l2w_ + nu_ * int_gradw_;
  r.x1_sq = sup_ + nu_ * int_grad_;
  return r;
}

XedResult xed_accumulator(std::span<const std::pair<double, SpectralField>> series,
                          double epsilon, double nu) {
  require(series.size() >= 2, "xed_accumulator: at least two samples required");
  XedAccumulator acc(epsilon, nu);
  for (const auto& [t, u] : series) acc.add(t, norm_L2_sq(u), norm_grad_sq(u));
  return acc.result();
}

}  // namespace helistab
