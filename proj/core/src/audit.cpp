#include "helistab/audit.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "helistab/error.hpp"
#include "helistab/norms.hpp"
#include "helistab/transform.hpp"
#include "helistab/velocity.hpp"

namespace helistab {

namespace {

constexpr Axis horizontal[2] = {Axis::x1, Axis::x2};
constexpr Axis all_axes[3] = {Axis::x1, Axis::x2, Axis::y};

double nrm(const SpectralField& f) { return norm_L2(f); }

SpectralField d(const SpectralField& f, Axis a) { return derivative(f, a); }

// Norm of the gradient (all components).
double grad_norm(const SpectralField& f) { return std::sqrt(norm_grad_sq(f)); }

double h1_norm(const SpectralField& f) { return std::sqrt(norm_L2_sq(f) + norm_grad_sq(f)); }

SpectralField component(const SpectralField& V, std::size_t c) { return V.component_field(c); }

// (a . grad) b for vector a and scalar or vector b, evaluated in physical space.
SpectralField advect(SpectralTransform& fft, const SpectralField& a, const SpectralField& b) {
  const TorusGrid& g = a.grid();
  std::vector<std::vector<double>> pa(3, std::vector<double>(g.points()));
  for (std::size_t c = 0; c < 3; ++c) fft.to_physical(a, c, pa[c]);
  SpectralField out(g, b.rank());
  std::vector<double> acc(g.points()), tmp(g.points());
  for (std::size_t c = 0; c < b.components(); ++c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
      fft.to_physical(d(b.component_field(c), all_axes[j]), 0, tmp);
      for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += pa[j][p] * tmp[p];
    }
    fft.to_spectral(acc, out, c);
  }
  return out;
}

// Pointwise product of scalar s with each component of b.
SpectralField scale_by(SpectralTransform& fft, const SpectralField& s, const SpectralField& b) {
  const TorusGrid& g = s.grid();
  std::vector<double> ps(g.points()), tmp(g.points());
  fft.to_physical(s, 0, ps);
  SpectralField out(g, b.rank());
  for (std::size_t c = 0; c < b.components(); ++c) {
    fft.to_physical(b, c, tmp);
    for (std::size_t p = 0; p < tmp.size(); ++p) tmp[p] *= ps[p];
    fft.to_spectral(tmp, out, c);
  }
  return out;
}

// Lap p = -sum_ij d_i v_j d_j v_i.
SpectralField pressure_laplacian_of(SpectralTransform& fft, const SpectralField& V) {
  const TorusGrid& g = V.grid();
  std::vector<std::vector<double>> grad(9, std::vector<double>(g.points()));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      fft.to_physical(d(V.component_field(j), all_axes[i]), 0, grad[3 * i + j]);
  std::vector<double> acc(g.points(), 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t p = 0; p < acc.size(); ++p) acc[p] -= grad[3 * i + j][p] * grad[3 * j + i][p];
  SpectralField out(g, Rank::scalar);
  fft.to_spectral(acc, out, 0);
  return out;
}

double safe_ratio(double lhs, double rhs) {
  if (lhs == 0) return 0;
  return rhs > 0 ? lhs / rhs : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double product_ratio(const SpectralField& f1, const SpectralField& f2, int i) {
  require(i == 1 || i == 2, "product_ratio: i must be 1 or 2");
  require(f1.rank() == Rank::scalar && f2.rank() == Rank::scalar && f1.grid() == f2.grid(),
          "product_ratio: scalar fields on one grid required");
  const Axis a = horizontal[i - 1];
  const SpectralField lhs = multiply(f1, d(f2, a));
  return safe_ratio(nrm(lhs), (nrm(d(f1, a)) + nrm(f1)) * nrm(laplacian(f2)));
}

std::array<double, audit_inequality_count - 1> structure_ratios(const SpectralField& V) {
  require(V.rank() == Rank::vector, "structure_ratios: vector field required");
  const TorusGrid& g = V.grid();
  SpectralTransform fft(g);
  const SpectralField v3 = component(V, 2);
  const SpectralField om = curl(V);
  const SpectralField w3 = component(om, 2);
  const SpectralField lap_v3 = laplacian(v3);
  const SpectralField lap_v3_ne = project_nonzero(lap_v3);
  const SpectralField Vne = project_nonzero(V);

  const double dw[2] = {nrm(d(w3, Axis::x1)), nrm(d(w3, Axis::x2))};
  const double grad_dw[2] = {grad_norm(d(w3, Axis::x1)), grad_norm(d(w3, Axis::x2))};
  const double d_lap_v3_ne[2] = {nrm(d(lap_v3_ne, Axis::x1)), nrm(d(lap_v3_ne, Axis::x2))};
  const double n_lap_v3_ne = nrm(lap_v3_ne);

  std::array<double, audit_inequality_count - 1> out{};
  // Second-derivative recovery.
  {
    const double rhs = dw[0] + dw[1] + n_lap_v3_ne;
    double r = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const SpectralField vi = project_nonzero(component(V, std::size_t(i)));
        const double lhs = nrm(d(d(vi, horizontal[i]), horizontal[j])) + nrm(d(vi, horizontal[j])) +
                           nrm(d(d(V, horizontal[i]), horizontal[j]));
        r = std::max(r, safe_ratio(lhs, rhs));
      }
    out[0] = r;
  }
  // Gradient recovery.
  {
    const double rhs = n_lap_v3_ne + grad_dw[0] + grad_dw[1];
    double r = 0;
    for (int i = 0; i < 2; ++i) {
      const SpectralField vi = project_nonzero(component(V, std::size_t(i)));
      const double lhs = grad_norm(d(vi, horizontal[i])) + grad_norm(vi) + nrm(d(om, horizontal[i]));
      r = std::max(r, safe_ratio(lhs, rhs));
    }
    out[1] = r;
  }
  // Third-derivative recovery.
  {
    const double rhs = d_lap_v3_ne[0] + d_lap_v3_ne[1] + grad_dw[0] + grad_dw[1];
    double r = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const SpectralField vi = project_nonzero(component(V, std::size_t(i)));
        const double lhs =
            grad_norm(d(d(vi, horizontal[i]), horizontal[j])) + grad_norm(d(vi, horizontal[j]));
        r = std::max(r, safe_ratio(lhs, rhs));
      }
    out[2] = r;
  }

  const SpectralField lap_p = pressure_laplacian_of(fft, V);
  const SpectralField adv_v3 = advect(fft, V, v3);
  const SpectralField w3V = scale_by(fft, w3, V);
  const SpectralField om_v3 = scale_by(fft, v3, om);
  const SpectralField advV = advect(fft, V, V);
  const SpectralField advVne = advect(fft, Vne, Vne);
  const double hV = norm_H2(V), hv3 = norm_H2(v3);
  const double h_dV[2] = {norm_H2(d(V, Axis::x1)), norm_H2(d(V, Axis::x2))};
  const double h_dv3[2] = {norm_H2(d(v3, Axis::x1)), norm_H2(d(v3, Axis::x2))};
  const double grad_lap_v3 = grad_norm(lap_v3);
  const double d_grad_lap_v3[2] = {grad_norm(d(lap_v3, Axis::x1)), grad_norm(d(lap_v3, Axis::x2))};
  const double A = d_lap_v3_ne[0] + d_lap_v3_ne[1] + dw[0] + dw[1];
  const double E = dw[0] + dw[1] + n_lap_v3_ne;
  // Nonlinear terms with one horizontal derivative.
  {
    const double B = hV + h_dV[0] + h_dV[1];
    const double C = grad_dw[0] + grad_dw[1];
    const double D = hv3 + h_dv3[0] + h_dv3[1];
    const double F = grad_lap_v3 + d_grad_lap_v3[0] + d_grad_lap_v3[1];
    const double rhs = A * B + C * D + E * F;
    double r = 0;
    for (int i = 0; i < 2; ++i) {
      const Axis a = horizontal[i];
      const double lhs = nrm(d(lap_p, a)) + grad_norm(d(adv_v3, a)) + nrm(d(w3V, a)) + nrm(d(om_v3, a));
      r = std::max(r, safe_ratio(lhs, rhs));
    }
    out[3] = r;
  }
  // Pressure and grad(V.grad v3).
  {
    const double rhs = (grad_dw[0] + grad_dw[1] + grad_lap_v3) * nrm(lap_v3) + E * (hV + grad_lap_v3);
    out[4] = safe_ratio(nrm(lap_p) + grad_norm(adv_v3), rhs);
  }
  const double lap_Vne = nrm(laplacian(Vne));
  // Advection without derivative.
  out[5] = safe_ratio(grad_norm(project_nonzero(advV)) + h1_norm(advVne), hV * lap_Vne);
  // Advection with one horizontal derivative.
  {
    double r = 0;
    for (int i = 0; i < 2; ++i) {
      const Axis a = horizontal[i];
      const double lhs = grad_norm(d(advV, a)) + grad_norm(d(advVne, a));
      const double rhs = h_dV[i] * lap_Vne + hV * nrm(d(laplacian(Vne), a));
      r = std::max(r, safe_ratio(lhs, rhs));
    }
    out[6] = r;
  }
  return out;
}

SpectralField random_audit_field(const TorusGrid& grid, int band, std::uint64_t seed) {
  require(band >= 1 && 4 * band < int(std::min({grid.n1(), grid.n2(), grid.ny()})),
          "random_audit_field: band must satisfy 1 <= band < n/4");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  SpectralField v3(grid, Rank::scalar), w3(grid, Rank::scalar);
  SpectralField zero(grid, Rank::vector);
  for (int k1 = -band; k1 <= band; ++k1)
    for (int k2 = -band; k2 <= band; ++k2)
      for (int m = -band; m <= band; ++m) {
        const double a = gauss(rng), b = gauss(rng), c = gauss(rng), e = gauss(rng);
        const double f = gauss(rng), h = gauss(rng), p = gauss(rng), q = gauss(rng);
        const bool positive = k1 > 0 || (k1 == 0 && (k2 > 0 || (k2 == 0 && m >= 0)));
        if (!positive) continue;
        if (k1 != 0 || k2 != 0) {
          v3.set_mode(0, k1, k2, m, Complex(a, b));
          w3.set_mode(0, k1, k2, m, Complex(c, e));
        } else {
          // Zero modes: arbitrary horizontal profiles in y, constant v3.
          zero.set_mode(0, 0, 0, m, Complex(f, m == 0 ? 0.0 : h));
          zero.set_mode(1, 0, 0, m, Complex(p, m == 0 ? 0.0 : q));
          if (m == 0) zero.set_mode(2, 0, 0, 0, a);
        }
      }
  auto [v1, v2] = recover_horizontal_velocity(v3, w3);
  SpectralField V = SpectralField::vector_from(v1, v2, v3);
  V += zero;
  return V;
}

AuditReport inequality_audit(std::size_t samples, std::uint64_t seed, const AuditOptions& opt) {
  require(samples >= 50, "inequality_audit: at least 50 samples required");
  const TorusGrid grid(opt.n, opt.n, opt.n, opt.delta);
  AuditReport rep;
  rep.samples = samples;
  rep.seed = seed;
  rep.stats.resize(audit_inequality_count);
  for (std::size_t q = 0; q < audit_inequality_count; ++q) rep.stats[q].name = audit_inequality_names[q];
  std::mt19937_64 seeds(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 100) throw NumericalError("inequality_audit: denominators keep degenerating");
      const std::uint64_t a = seeds(), b = seeds();
      const SpectralField V = random_audit_field(grid, opt.band, a);
      // Independent scalars for the product inequality.
      const SpectralField f1 = random_audit_field(grid, opt.band, b).component_field(2);
      const SpectralField f2 = V.component_field(2);
      std::array<double, audit_inequality_count> r{};
      r[0] = std::max(product_ratio(f1, f2, 1), product_ratio(f1, f2, 2));
      const auto rest = structure_ratios(V);
      std::copy(rest.begin(), rest.end(), r.begin() + 1);
      bool ok = true;
      for (double v : r) ok = ok && std::isfinite(v);
      if (!ok) {
        ++rep.resampled;
        continue;
      }
      for (std::size_t q = 0; q < audit_inequality_count; ++q) {
        rep.stats[q].max_ratio = std::max(rep.stats[q].max_ratio, r[q]);
        rep.stats[q].mean_ratio += r[q] / double(samples);
      }
      break;
    }
  }
  return rep;
}

}  // namespace helistab
