#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "helistab/fit.hpp"
#include "helistab/operators.hpp"

namespace helistab {

struct ModeTrajectory {
  ModeParams params;
  int trunc = 0;
  Metric metric = Metric::euclidean;
  double dt = 0;
  std::size_t sample_every = 1;
  std::string scheme = "dense-exponential";
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> u;
  std::vector<Eigen::VectorXcd> w;  // empty unless coupled

  bool coupled() const { return !w.empty(); }
  // s = m0 w + u at sample i (coupled runs only).
  Eigen::VectorXcd combination(std::size_t i) const;
};

struct EvolveOptions {
  int trunc = 64;
  std::size_t sample_every = 1;
  double advection_scale = 1.0;
  double growth_abort = 10.0;  // abort when |u| exceeds this multiple of |u0|
};

// Largest admissible step: min(0.1/(|k| delta^2), 0.1/(nu m0^2 M^2)).
double max_mode_dt(const ModeParams& p, int M);

// d_t u + (nu|k|^2 + L) u = 0, with L in the star metric when alpha^2 > 1.
ModeTrajectory evolve_mode(const ModeParams& p, const Eigen::VectorXcd& u0, double T, double dt,
                           const EvolveOptions& opt = {});

// d_t w + (nu|k|^2 + H) w = -i |k| delta^3 sin(y + alpha_k)(alpha^2 - d_y^2)^{-1} u.
ModeTrajectory evolve_coupled(const ModeParams& p, const Eigen::VectorXcd& u0,
                              const Eigen::VectorXcd& w0, double T, double dt,
                              const EvolveOptions& opt = {});

// Pure H evolution: d_t s + (nu|k|^2 + H) s = 0, sampled like evolve_mode.
ModeTrajectory evolve_heat_H(const ModeParams& p, const Eigen::VectorXcd& s0, double T, double dt,
                             const EvolveOptions& opt = {});

// The coupling matrix C with w' = ... - C u, i.e. i|k|delta^3 sin(y+alpha_k)(alpha^2-d_y^2)^{-1}.
Eigen::MatrixXcd coupling_matrix(const ModeParams& p, int M, double advection_scale = 1.0);

struct DissipationIntegrals {
  double plain = 0;
  double weighted = 0;
};
// nu m0^2 int (alpha^2|u|^2 + |d_y u|^2) ds / |u0|^2 and the variant weighted
// by e^{2 c' nu^{1/2} |k|^{1/2} s}.
DissipationIntegrals dissipation_integrals(const ModeTrajectory& traj, double cprime);

// Single-mode Gaussian-in-time forcing  amplitude exp(-(t-t0)^2/(2 width^2)) e^{imy} e_component.
struct ForcingPulse {
  int component = 0;  // 0: x1, 1: x2, 2: y
  int m = 1;
  Complex amplitude = 1.0;
  double t0 = 0;
  double width = 1;
  Complex envelope(double t) const;
};

enum class ForcedSystem { heat_H, L_equation, coupled };

struct ForcedEdOptions {
  int trunc = 64;
  double dt = 0;         // 0: use max_mode_dt
  double epsilon = 0.1;  // X_ed weight exponent
  ForcedSystem system = ForcedSystem::heat_H;
};

struct ForcedEdReport {
  double ratio = 0;        // |u|^2_Xed / (|u0|^2 + nu^{-1}|e F|^2_{L2L2})
  double ratio_w = 0;      // coupled: |w|^2_Xed / (|u0|^2 + |w0|^2 + nu^{-1}(|eF|^2 + |eG|^2))
  double xed_sq = 0;
  double xed_w_sq = 0;
  double initial_sq = 0;
  double forcing_sq = 0;   // |e^{eps nu^{1/2} t} F|^2_{L2L2}
  std::size_t steps = 0;
};

// The per-mode state carries the divergence div F = (i k1 F1 + i k2 F2 + i m m0 F3).
// In the coupled system the w-equation is forced by the same pulse.
ForcedEdReport forced_ed_check(const ModeParams& p, const Eigen::VectorXcd& u0,
                               const ForcingPulse& F, double T, const ForcedEdOptions& opt = {});

struct Delta1Report {
  double nu = 0;
  int k1 = 1, k2 = 0;
  double T = 0;
  int trunc = 0;
  DecayFit q1u, p1u, q1w, p1w;
  double p1_coupling = 0;  // sup_t e^{nu t}|P1 u(t) - e^{-nu t}P1 u0| / |Q1 u0|
  ModeTrajectory traj;
};

// Evolves the delta = 1 coupled system and splits by P1 (constant mode) / Q1.
Delta1Report delta1_experiment(int k1, int k2, double nu, double T, const Eigen::VectorXcd& u0,
                               const Eigen::VectorXcd& w0, int M, double dt,
                               std::size_t sample_every = 1);

// Smooth, truncation-independent delta = 1 data: coefficients exp(-m^2/4) on m != 0
// (plus `constant` on m = 0).
Eigen::VectorXcd smooth_mode_data(int M, Complex constant, double phase = 0.3);

}  // namespace helistab
