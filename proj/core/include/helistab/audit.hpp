#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "helistab/spectral_field.hpp"

namespace helistab {

// Randomized check of the product and velocity-recovery inequalities: each
// inequality is measured as LHS / RHS with the implicit constant set to 1.
inline constexpr std::size_t audit_inequality_count = 8;
inline constexpr std::array<const char*, audit_inequality_count> audit_inequality_names = {
    "product",              // |f1 d_i f2| vs (|d_i f1| + |f1|) |Lap f2|
    "recovery_second",      // second derivatives of v_i from omega3, Lap v3
    "recovery_gradient",    // gradients of v_i and d_i omega
    "recovery_third",       // third derivatives of v_i
    "nonlinear_pressure_d", // d_i of pressure, V.grad v3, omega3 V, omega v3
    "nonlinear_pressure",   // pressure and grad(V.grad v3)
    "nonlinear_advection",  // grad((V.grad V)_neq) and V_neq.grad V_neq in H1
    "nonlinear_advection_d" // d_i grad(V.grad V)
};

struct AuditOptions {
  std::size_t n = 16;  // grid points per axis
  int band = 3;        // |k| <= band per axis; products stay alias-free for band < n/4
  double delta = 2.0;
};

struct InequalityStat {
  std::string name;
  double max_ratio = 0;
  double mean_ratio = 0;
};

struct AuditReport {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t resampled = 0;  // draws rejected for a degenerate denominator
  std::vector<InequalityStat> stats;
};

// max_i |f1 d_i f2| / ((|d_i f1| + |f1|) |Lap f2|) for i = 1, 2 (scalar fields).
// Returns 0 when the left side vanishes; NaN when only the right side does.
double product_ratio(const SpectralField& f1, const SpectralField& f2, int i);

// The structural ratios for a divergence-free V (index order of the names above,
// excluding "product"); maximized over i, j in {1, 2}.
std::array<double, audit_inequality_count - 1> structure_ratios(const SpectralField& V);

// Divergence-free field built from random (v3, omega3) plus random zero modes.
SpectralField random_audit_field(const TorusGrid& grid, int band, std::uint64_t seed);

AuditReport inequality_audit(std::size_t samples, std::uint64_t seed, const AuditOptions& opt = {});

}  // namespace helistab
