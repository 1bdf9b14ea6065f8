#include "helistab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "helistab/error.hpp"

namespace helistab {

namespace {

struct LineFit {
  double slope, intercept, max_residual, slope_stderr;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0, "fit: abscissae must not all coincide");
  LineFit f{sxy / sxx, 0, 0, 0};
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.max_residual = std::max(f.max_residual, std::abs(r));
    ss += r * r;
  }
  f.slope_stderr = x.size() > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace

PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), "fit_power_law: size mismatch");
  require(xs.size() >= 3, "fit_power_law: at least three points required");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(xs[i] > 0 && ys[i] > 0 && std::isfinite(xs[i]) && std::isfinite(ys[i]),
            "fit_power_law: data must be positive");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  const LineFit f = least_squares(lx, ly);
  return {f.slope, std::exp(f.intercept), f.max_residual, f.slope_stderr};
}

DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> norms,
                        double transient_fraction) {
  require(times.size() == norms.size() && times.size() >= 2, "fit_decay_rate: bad series");
  require(transient_fraction >= 0 && transient_fraction < 1,
          "fit_decay_rate: transient fraction must lie in [0,1)");
  const double t0 = times.front(), t1 = times.back();
  const double start = t0 + transient_fraction * (t1 - t0);
  std::vector<double> t, l;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < start) continue;
    require(norms[i] > 0 && std::isfinite(norms[i]), "fit_decay_rate: norms must be positive");
    t.push_back(times[i]);
    l.push_back(std::log(norms[i]));
  }
  require(t.size() >= 2, "fit_decay_rate: fewer than two samples in the window");
  const LineFit f = least_squares(t, l);
  return {-f.slope, std::exp(f.intercept), f.max_residual};
}

}  // namespace helistab
