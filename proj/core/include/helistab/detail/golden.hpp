#pragma once

#include <cmath>

namespace helistab {

template <class F>
double golden_section_minimize(F&& f, double a, double b, double tol, double* fmin) {
  const double invphi = (std::sqrt(5.0) - 1) / 2;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double x = fc <= fd ? c : d;
  if (fmin) *fmin = fc <= fd ? fc : fd;
  return x;
}

}  // namespace helistab
