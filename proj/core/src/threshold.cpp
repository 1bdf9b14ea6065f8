#include "helistab/threshold.hpp"

#include <algorithm>
#include <cmath>

#include "helistab/error.hpp"

namespace helistab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

double default_horizon(double nu) {
  require(nu > 0, "default_horizon: nu must be > 0");
  return std::min(20.0 / std::sqrt(nu), 5.0 / nu);
}

namespace {

struct Summary {
  double E1_max = 0, E2_max = 0, residual = 0;
};

Summary summarize(const TrajectoryResult& r) {
  Summary s;
  double emax = 0;
  for (const auto& row : r.diagnostics.rows) {
    s.E1_max = std::max(s.E1_max, row.E1);
    s.E2_max = std::max(s.E2_max, row.E2);
    emax = std::max(emax, row.energy_nonzero);
  }
  const double last = r.diagnostics.rows.empty() ? 0.0 : r.diagnostics.rows.back().energy_nonzero;
  s.residual = emax > 0 ? last / emax : 0.0;
  return s;
}

}  // namespace

Verdict classify(const TrajectoryResult& r, double x0_initial, const ClassifierOptions& opt) {
  if (r.diverged) return Verdict::unstable;
  const double e0 = r.energy.E1_initial;
  const Summary s = summarize(r);
  if (!std::isfinite(s.E1_max) || !std::isfinite(s.E2_max)) return Verdict::unstable;
  if (e0 > 0 && s.E1_max > opt.unstable_growth * e0) return Verdict::unstable;
  if (x0_initial > 0 && r.state.nu * s.E2_max > opt.unstable_growth * x0_initial) return Verdict::unstable;
  if (s.E1_max <= opt.stable_growth * e0 && s.residual <= opt.residual_energy) return Verdict::stable;
  return Verdict::inconclusive;
}

ThresholdRecord classify_amplitude(double nu, double amplitude, std::uint64_t seed, double horizon,
                                   const DnsRunSpec& spec, const ClassifierOptions& opt) {
  require(amplitude >= 0 && horizon > 0, "classify_amplitude: need amplitude >= 0 and horizon > 0");
  ThresholdRecord rec;
  rec.nu = nu;
  rec.amplitude = amplitude;
  rec.seed = seed;
  if (amplitude == 0) {
    rec.verdict = Verdict::stable;
    rec.horizon = horizon;
    return rec;
  }
  const TorusGrid grid(spec.n1, spec.n2, spec.ny, spec.delta);
  PerturbationSolver solver(grid, nu);
  const SpectralField V0 = init_random(grid, amplitude, seed);
  const double x0 = norm_X0(V0);
  const double dt = spec.dt > 0 ? spec.dt : cfl_dt(solver, 0.0);
  TrajectoryOptions topt;
  topt.sample_every = spec.sample_every;
  topt.epsilon = spec.epsilon;
  topt.abort_E1_factor = opt.unstable_growth * 1.0001;
  topt.abort_X0_factor = opt.unstable_growth * 1.0001;

  double T = horizon;
  for (int pass = 0; pass < 2; ++pass) {
    const TrajectoryResult r = run_trajectory(solver, V0, T, dt, topt);
    const Summary s = summarize(r);
    rec.verdict = classify(r, x0, opt);
    rec.horizon = T;
    rec.E1_initial = r.energy.E1_initial;
    rec.E1_max = s.E1_max;
    rec.E2_max = s.E2_max;
    rec.residual_energy_fraction = s.residual;
    rec.dt = dt;
    rec.steps = r.steps;
    rec.failure = r.failure;
    if (rec.verdict != Verdict::inconclusive || pass == 1) break;
    rec.extended = true;
    T *= opt.horizon_extension;
  }
  return rec;
}

ThresholdSweep threshold_bisect(const std::vector<double>& nus, double beta_probe,
                                const std::vector<std::uint64_t>& seeds, const BisectOptions& opt) {
  require(seeds.size() >= 2, "threshold_bisect: at least two seeds required");
  require(!nus.empty() && opt.iterations >= 1, "threshold_bisect: empty nu grid or no iterations");
  ThresholdSweep sweep;
  for (double nu : nus) {
    const double T = opt.horizon > 0 ? opt.horizon : default_horizon(nu);
    for (std::uint64_t seed : seeds) {
      auto trial = [&](double a) {
        ThresholdRecord rec = classify_amplitude(nu, a, seed, T, opt.spec, opt.classifier);
        sweep.records.push_back(rec);
        return rec.verdict == Verdict::stable;
      };
      // Bracket: stable lo < unstable hi, by decades from nu^beta_probe.
      double lo = 0, hi = 0;
      const double probe = std::pow(nu, beta_probe);
      if (trial(probe)) {
        lo = probe;
        double a = probe;
        for (int k = 0; k < opt.max_bracket_steps && hi == 0; ++k) {
          a *= 10;
          if (trial(a)) lo = a;
          else hi = a;
        }
      } else {
        hi = probe;
        double a = probe;
        for (int k = 0; k < opt.max_bracket_steps && lo == 0; ++k) {
          a /= 10;
          if (trial(a)) lo = a;
          else hi = a;
        }
      }
      if (lo == 0 || hi == 0)
        throw NumericalError("threshold_bisect: no stable/unstable bracket found");
      for (int it = 0; it < opt.iterations; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (trial(mid)) lo = mid;
        else hi = mid;
      }
      sweep.critical.push_back({nu, seed, lo, hi, std::sqrt(lo * hi)});
    }
  }
  std::vector<double> xs, ys;
  for (const auto& c : sweep.critical) xs.push_back(c.nu), ys.push_back(c.estimate);
  std::vector<double> distinct = nus;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() >= 2 && xs.size() >= 3) {
    sweep.fit = fit_power_law(xs, ys);
    sweep.slope_lo = sweep.fit.slope - 2 * sweep.fit.slope_stderr;
    sweep.slope_hi = sweep.fit.slope + 2 * sweep.fit.slope_stderr;
    sweep.fitted = true;
  }
  return sweep;
}

}  // namespace helistab
