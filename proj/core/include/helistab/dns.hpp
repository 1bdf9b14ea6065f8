#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "helistab/norms.hpp"
#include "helistab/spectral_field.hpp"
#include "helistab/transform.hpp"

namespace helistab {

// U* = (delta^2 sin(m0 y), delta^2 cos(m0 y), 0).
SpectralField steady_state(const TorusGrid& grid);
// F = (nu sin(m0 y), nu cos(m0 y), 0), the forcing that keeps U* steady.
SpectralField helical_forcing(const TorusGrid& grid, double nu);
// Leray projection of -(U.grad)U + nu Lap U + F (no dealiasing needed for U*).
SpectralField momentum_residual(const SpectralField& U, double nu);

struct DnsOptions {
  bool nonlinear = true;
  double advection_scale = 1.0;  // multiplies every U* term; test hook
  double cfl_limit = 0.5;
  PlanEffort effort = PlanEffort::estimate;
};

struct PerturbationState {
  explicit PerturbationState(SpectralField v, double time = 0, double viscosity = 0)
      : V(std::move(v)), t(time), nu(viscosity) {}
  SpectralField V;
  double t = 0;
  double nu = 0;
};

// Galerkin solver for the perturbation system around U*. Retained modes obey
// the 2/3 rule per axis. Time stepping is integrating-factor midpoint (Lawson
// RK2) with the exact exponential of the whole linearized operator, one dense
// block per horizontal wavenumber in a divergence-free basis.
class PerturbationSolver {
 public:
  PerturbationSolver(const TorusGrid& grid, double nu, const DnsOptions& opt = {});
  ~PerturbationSolver();
  PerturbationSolver(const PerturbationSolver&) = delete;
  PerturbationSolver& operator=(const PerturbationSolver&) = delete;

  const TorusGrid& grid() const { return grid_; }
  double nu() const { return nu_; }
  const DnsOptions& options() const { return opt_; }
  int cutoff(Axis a) const;
  double max_wavenumber() const;
  bool retained(int k1, int k2, int m) const;

  SpectralField truncate(const SpectralField& V) const;
  // P[-(U*.grad)V - (V.grad)U* + nu Lap V] on retained modes.
  SpectralField linear_tendency(const SpectralField& V) const;
  // -P T[div(V (x) V)]; zero when nonlinearity is disabled.
  SpectralField nonlinear_tendency(const SpectralField& V);
  SpectralField rhs(const SpectralField& V);
  // Laplacian of the pressure: Lap p = -sum_ij d_i v_j d_j v_i, dealiased.
  SpectralField pressure_laplacian(const SpectralField& V);
  // Largest pointwise |V| on the grid.
  double max_speed(const SpectralField& V);
  // dt max(delta^2, |V|max) kmax.
  double cfl_number(double dt, double vmax) const;

  // One step; throws NumericalError on CFL violation or NaN.
  void step(SpectralField& V, double dt);
  // Applies exp(h L) exactly (linear part only).
  void apply_linear_exponential(SpectralField& V, double h);

 private:
  struct Block;
  struct Mode;
  void ensure_blocks(double h);
  void nonlinear_products(const SpectralField& V, double* vmax);
  // out = -P i k_j (v_i v_j)^ from the cached products (retained modes only).
  void assemble_nonlinear(SpectralField& out) const;
  // out = exp(h L)(a + s b) with h from the last ensure_blocks; out may alias a.
  // Returns false if a non-finite value appeared.
  bool exp_apply(const SpectralField& a, const SpectralField* b, double s, SpectralField& out) const;

  TorusGrid grid_;
  double nu_;
  DnsOptions opt_;
  int K1_, K2_, Ky_;
  std::unique_ptr<SpectralTransform> fft_;
  std::vector<std::vector<double>> phys_;        // v1, v2, v3 on the grid
  std::vector<std::vector<Complex>> products_;   // half-spectrum (v_i v_j)^, i <= j
  std::vector<Block> blocks_;
  std::vector<Mode> modes_;
  double block_h_ = -1;
  SpectralField stage_, nl_;
};

SpectralField pressure_diagnostic(PerturbationSolver& solver, const SpectralField& V);

// Complex Gaussian coefficients on |k_i| <= n_i/4, Hermitian, Leray-projected,
// scaled to |V|_X0 = target. Deterministic in seed.
SpectralField init_random(const TorusGrid& grid, double target_x0, std::uint64_t seed);

struct DiagnosticRow {
  double t = 0;
  double v3_x0 = 0;
  double d1_lap_v3 = 0, d2_lap_v3 = 0;
  double d1_omega3 = 0, d2_omega3 = 0;
  double V_x0 = 0;
  double lap_P0v1 = 0, lap_P0v2 = 0, lap_P0v3 = 0;
  double d1_lap_V = 0, d2_lap_V = 0;
  double d1_lap_p = 0, d2_lap_p = 0;
  double energy_nonzero = 0;  // |P_neq V|^2
  double E1 = 0, E2 = 0;      // running values
};

struct EnergyFunctionals {
  double E1 = 0;
  double E2 = 0;
  double E1_initial = 0;
  std::vector<double> times, E1_series, E2_series;
};

struct TrajectoryDiagnostics {
  std::vector<DiagnosticRow> rows;
  double epsilon = 0;
  double M1 = 0;
  double M2 = 0;
  // Fitted decay rates (20% transient excluded); NaN when not fittable.
  double rate_d1_lap_v3 = 0, rate_d2_lap_v3 = 0, rate_d1_omega3 = 0, rate_d2_omega3 = 0;
  double max_divergence = 0;
  double max_hermitian_defect = 0;
};

struct TrajectoryResult {
  explicit TrajectoryResult(PerturbationState s) : state(std::move(s)) {}
  PerturbationState state;
  EnergyFunctionals energy;
  TrajectoryDiagnostics diagnostics;
  bool diverged = false;
  std::string failure;
  std::size_t steps = 0;
};

struct TrajectoryOptions {
  std::size_t sample_every = 10;
  double epsilon = 0.1;      // X_ed weight
  bool check_invariants = false;  // divergence/Hermitian defect each step
  // Optional early stop (returns diverged = false) when a predicate trips.
  double abort_E1_factor = 0;      // stop if E1(t) > factor * E1(0)
  double abort_X0_factor = 0;      // stop if nu |V|_X0 > factor * |V0|_X0
};

TrajectoryResult run_trajectory(PerturbationSolver& solver, const SpectralField& V0, double T,
                                double dt, const TrajectoryOptions& opt = {});

// Largest dt meeting the CFL bound for speed vmax.
double cfl_dt(const PerturbationSolver& solver, double vmax);

struct LiftUpReport {
  double c = 0, nu = 0, delta = 0, T = 0;
  double peak_v1 = 0;        // max_t |cos(m0 y) amplitude of P0 v1|
  double peak_v2 = 0;        // max_t |sin(m0 y) amplitude of P0 v2|
  double predicted = 0;      // delta^3 c / nu
  double closed_form_at_T = 0;
  double ratio = 0;          // peak_v1 / predicted
  double max_closed_form_error = 0;  // sup_t |a(t) - a_closed(t)| / predicted
  bool nonlinear_flag = false;       // ratio drifted > 10% from the closed form
};

struct LiftUpOptions {
  std::size_t n1 = 4, n2 = 4, ny = 16;
  std::size_t sample_every = 50;
  double dt = 0;  // 0: CFL-limited
};

LiftUpReport lift_up_experiment(double c, double nu, double delta, double T,
                                const LiftUpOptions& opt = {});

}  // namespace helistab
