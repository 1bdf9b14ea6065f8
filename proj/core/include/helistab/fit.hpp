#pragma once

#include <span>

namespace helistab {

struct PowerLawFit {
  double slope = 0;
  double prefactor = 0;
  double max_residual = 0;  // largest |log-space residual|
  double slope_stderr = 0;
};

// Least squares on log y = slope log x + log prefactor; >= 3 positive points.
PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys);

struct DecayFit {
  double rate = 0;
  double prefactor = 0;
  double max_residual = 0;
};

// Least squares on log n = log prefactor - rate t over t in
// [t0 + transient_fraction (t1 - t0), t1].
DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> norms,
                        double transient_fraction = 0.2);

// Golden-section minimization of f on [a, b] to absolute tolerance tol.
template <class F>
double golden_section_minimize(F&& f, double a, double b, double tol, double* fmin = nullptr);

}  // namespace helistab

#include "helistab/detail/golden.hpp"
