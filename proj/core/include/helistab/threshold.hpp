#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "helistab/dns.hpp"
#include "helistab/fit.hpp"

namespace helistab {

enum class Verdict { stable, unstable, inconclusive };
std::string to_string(Verdict v);

// Verdict rules, applied identically to every trajectory of a sweep.
struct ClassifierOptions {
  double stable_growth = 2.0;         // STABLE needs E1(t) <= stable_growth * E1(0) throughout
  double residual_energy = 1e-2;      // ... and |P_neq V(T)|^2 <= residual_energy * max_t |P_neq V|^2
  double unstable_growth = 1e3;       // UNSTABLE: E1 or nu |V|_X0 beyond this factor of the initial value
  double horizon_extension = 2.0;     // INCONCLUSIVE reruns once with the horizon multiplied by this
  bool operator==(const ClassifierOptions&) const = default;
};

struct DnsRunSpec {
  std::size_t n1 = 32, n2 = 32, ny = 32;
  double delta = 2.0;
  double epsilon = 0.1;
  std::size_t sample_every = 20;
  double dt = 0;  // 0: CFL-limited by delta^2
};

struct ThresholdRecord {
  double nu = 0;
  double amplitude = 0;  // |V0|_X0
  std::uint64_t seed = 0;
  double horizon = 0;    // final horizon (after any extension)
  bool extended = false;
  Verdict verdict = Verdict::inconclusive;
  // Snapshot of the deciding diagnostics.
  double E1_initial = 0, E1_max = 0, E2_max = 0;
  double residual_energy_fraction = 0;
  double dt = 0;
  std::size_t steps = 0;
  std::string failure;
};

// Pure classification of a finished trajectory.
Verdict classify(const TrajectoryResult& r, double x0_initial, const ClassifierOptions& opt);

// Default horizon min(20 / nu^{1/2}, 5 / nu).
double default_horizon(double nu);

// Runs and classifies one trajectory from init_random(amplitude, seed).
ThresholdRecord classify_amplitude(double nu, double amplitude, std::uint64_t seed, double horizon,
                                   const DnsRunSpec& spec = {}, const ClassifierOptions& opt = {});

struct BisectOptions {
  int iterations = 10;
  int max_bracket_steps = 10;  // decades searched upward/downward; coarse grids sit far above nu^beta
  double horizon = 0;         // 0: default_horizon(nu)
  DnsRunSpec spec;
  ClassifierOptions classifier;
};

struct CriticalAmplitude {
  double nu = 0;
  std::uint64_t seed = 0;
  double stable = 0;    // largest amplitude classified STABLE
  double unstable = 0;  // smallest amplitude classified not stable
  double estimate = 0;  // geometric midpoint
};

struct ThresholdSweep {
  std::vector<ThresholdRecord> records;
  std::vector<CriticalAmplitude> critical;
  PowerLawFit fit;                   // estimate ~ prefactor nu^slope
  double slope_lo = 0, slope_hi = 0; // slope -/+ 2 standard errors
  bool fitted = false;
};

// Bisects the amplitude between a STABLE and a not-STABLE bracket per (nu, seed);
// the bracket search starts at nu^beta_probe. Throws NumericalError on bracket failure.
ThresholdSweep threshold_bisect(const std::vector<double>& nus, double beta_probe,
                                const std::vector<std::uint64_t>& seeds, const BisectOptions& opt = {});

}  // namespace helistab
