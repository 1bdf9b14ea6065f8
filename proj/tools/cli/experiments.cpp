#include "cli/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

#include <Eigen/Core>
#include <helistab/audit.hpp>
#include <helistab/dns.hpp>
#include <helistab/operators.hpp>
#include <helistab/propagator.hpp>
#include <helistab/pseudospectrum.hpp>
#include <helistab/snapshot.hpp>
#include <helistab/threshold.hpp>
#include <helistab/transform.hpp>

#include "cli/csv.hpp"

namespace helistab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int default_jobs() {
  if (const char* env = std::getenv("HELISTAB_JOBS")) {
    try {
      const int j = std::stoi(env);
      if (j >= 1) return j;
    } catch (const std::exception&) {
    }
    throw UsageError("HELISTAB_JOBS must be a positive integer");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 1 ? static_cast<int>(hw) - 1 : 1;
}

namespace {

// Runs f(0..n-1) on up to `jobs` threads; results keep index order.
template <class F>
auto parallel_map(std::size_t n, int jobs, F f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t width = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < width; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string path_in(const ExperimentConfig& c, const std::string& name) {
  return (fs::path(c.out) / name).string();
}

double sqrt_nu(double nu) { return std::sqrt(nu); }

Metric natural_metric(const ModeParams& p) { return p.alpha2() > 1 ? Metric::star : Metric::euclidean; }

double epsilon_for(const ExperimentConfig& c, double nu, double delta) {
  return c.epsilon > 0 ? c.epsilon : 0.25 * pseudospectral_constant(nu, delta);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[std::size_t(i)] = a + (b - a) * i / (n - 1);
  return v;
}

// Samples so that a run keeps about `target` stored states.
std::size_t stride_for(double T, double dt, std::size_t target = 200) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(T / dt / double(target)));
}

json fit_json(const PowerLawFit& f) {
  return {{"slope", f.slope}, {"prefactor", f.prefactor}, {"slope_stderr", f.slope_stderr},
          {"max_residual", f.max_residual}};
}

}  // namespace

CommandResult verify_linear(const ExperimentConfig& c) {
  CommandResult res;
  struct Cell {
    double nu, delta;
  };
  std::vector<Cell> cells;
  for (double nu : c.nu)
    for (double d : c.delta) cells.push_back({nu, d});

  struct Out {
    Cell cell;
    PsiResult psiH, psiL;
    double accretivity = 0;
    int gp_violations = 0;
    std::vector<double> times, normH, normL;
    ModeTrajectory traj;
    DecayFit fit;
  };
  const auto outs = parallel_map(cells.size(), c.jobs, [&](std::size_t i) {
    Out o;
    o.cell = cells[i];
    const ModeParams p = ModeParams::make(o.cell.nu, o.cell.delta, c.k1, c.k2);
    const OperatorMatrix H = assemble_H(p, c.M);
    OperatorMatrix L = assemble_L(p, c.M, natural_metric(p));
    if (c.corrupt_operator) L.entries(L.index(1), L.index(0)) += 1.0;  // breaks the skew structure
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> g;
    for (int r = 0; r < 20; ++r) {
      Eigen::VectorXcd u(L.size());
      for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = Complex(g(rng), g(rng));
      o.accretivity = std::max(o.accretivity, accretivity_residual(L, u));
    }
    o.psiH = psi_bound(H);
    o.psiL = psi_bound(L);
    const double T = c.T > 0 ? c.T : 10 / sqrt_nu(o.cell.nu);
    o.times = linspace(0, T, 41);
    o.normH = semigroup_norm(H, o.times);
    o.normL = semigroup_norm(L, o.times);
    for (std::size_t j = 0; j < o.times.size(); ++j) {
      const double bh = std::exp(-o.times[j] * o.psiH.psi + std::numbers::pi / 2);
      const double bl = std::exp(-o.times[j] * o.psiL.psi + std::numbers::pi / 2);
      if (o.normH[j] > bh * (1 + 1e-10)) ++o.gp_violations;
      if (o.normL[j] > bl * (1 + 1e-10)) ++o.gp_violations;
    }
    const double dt = c.dt > 0 ? c.dt : max_mode_dt(p, c.M);
    EvolveOptions eo;
    eo.trunc = c.M;
    eo.sample_every = stride_for(T, dt);
    o.traj = evolve_mode(p, smooth_mode_data(c.M, 1.0), T, dt, eo);
    std::vector<double> norms;
    for (const auto& u : o.traj.u) norms.push_back(u.norm());
    o.fit = fit_decay_rate(o.traj.times, norms);
    return o;
  });

  CsvWriter psi(path_in(c, "psi.csv"), {"family", "operator", "metric", "nu", "delta", "k1", "k2", "M",
                                        "lambda_star", "psi", "psi_over_sqrt_nu", "accretivity_residual"});
  CsvWriter gp(path_in(c, "semigroup.csv"), {"family", "operator", "metric", "nu", "delta", "k1", "k2", "M",
                                             "t", "semigroup_norm", "bound"});
  CsvWriter dec(path_in(c, "decay.csv"), {"family", "nu", "delta", "k1", "k2", "M", "t", "norm_u",
                                          "fitted_rate", "rate_over_sqrt_nu"});
  json cellsj = json::array();
  for (const Out& o : outs) {
    const auto& [nu, d] = o.cell;
    auto prow = [&](const char* op, const PsiResult& r, double acc) {
      psi.row({std::string("psi"), std::string(op), std::string(to_string(r.metric)), nu, d, (long long)c.k1,
               (long long)c.k2, (long long)c.M, r.lambda_star, r.psi, r.psi / sqrt_nu(nu), acc});
    };
    prow("H", o.psiH, 0.0);
    prow("L", o.psiL, o.accretivity);
    for (std::size_t j = 0; j < o.times.size(); ++j) {
      gp.row({std::string("semigroup"), std::string("H"), std::string(to_string(o.psiH.metric)), nu, d,
              (long long)c.k1, (long long)c.k2, (long long)c.M, o.times[j], o.normH[j],
              std::exp(-o.times[j] * o.psiH.psi + std::numbers::pi / 2)});
      gp.row({std::string("semigroup"), std::string("L"), std::string(to_string(o.psiL.metric)), nu, d,
              (long long)c.k1, (long long)c.k2, (long long)c.M, o.times[j], o.normL[j],
              std::exp(-o.times[j] * o.psiL.psi + std::numbers::pi / 2)});
    }
    for (std::size_t j = 0; j < o.traj.times.size(); ++j)
      dec.row({std::string("decay"), nu, d, (long long)c.k1, (long long)c.k2, (long long)c.M, o.traj.times[j],
               o.traj.u[j].norm(), o.fit.rate, o.fit.rate / sqrt_nu(nu)});
    const bool acc_ok = o.accretivity <= 1e-11;
    if (!acc_ok)
      res.failures.push_back("accretivity residual " + format_double(o.accretivity) + " at nu=" + format_double(nu));
    if (o.gp_violations > 0)
      res.failures.push_back(std::to_string(o.gp_violations) + " semigroup bound violations at nu=" + format_double(nu));
    res.verified = res.verified && acc_ok && o.gp_violations == 0;
    cellsj.push_back({{"nu", nu}, {"delta", d}, {"psi_H", o.psiH.psi}, {"psi_L", o.psiL.psi},
                      {"accretivity_residual", o.accretivity}, {"semigroup_violations", o.gp_violations},
                      {"decay_rate", o.fit.rate}});
  }
  res.outputs = {psi.path(), gp.path(), dec.path()};
  res.summary["cells"] = cellsj;
  return res;
}

CommandResult scan_psi(const ExperimentConfig& c) {
  CommandResult res;
  struct Cell {
    double nu, delta;
    bool L;
  };
  std::vector<Cell> cells;
  for (double d : c.delta)
    for (bool L : {false, true})
      for (double nu : c.nu) cells.push_back({nu, d, L});
  const auto outs = parallel_map(cells.size(), c.jobs, [&](std::size_t i) {
    const Cell& e = cells[i];
    const ModeParams p = ModeParams::make(e.nu, e.delta, c.k1, c.k2);
    auto assemble = [&](int M) {
      return e.L ? assemble_L(p, M, natural_metric(p)) : assemble_H(p, M);
    };
    return psi_bound_converged(assemble, c.M);
  });
  CsvWriter psi(path_in(c, "psi.csv"), {"family", "operator", "metric", "nu", "delta", "k1", "k2", "M",
                                        "lambda_star", "psi", "psi_over_sqrt_nu", "rel_change", "converged"});
  json fits = json::array();
  for (double d : c.delta)
    for (bool L : {false, true}) {
      std::vector<double> xs, ys;
      std::string metric;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].delta != d || cells[i].L != L) continue;
        const ConvergedPsi& r = outs[i];
        metric = to_string(r.result.metric);
        psi.row({std::string("psi"), std::string(L ? "L" : "H"), metric, cells[i].nu, d, (long long)c.k1,
                 (long long)c.k2, (long long)r.M, r.result.lambda_star, r.result.psi,
                 r.result.psi / sqrt_nu(cells[i].nu), r.rel_change, (long long)r.converged});
        if (!r.converged) res.failures.push_back("truncation did not converge at nu=" + format_double(cells[i].nu));
        xs.push_back(cells[i].nu);
        ys.push_back(r.result.psi);
      }
      if (xs.size() >= 3) {
        json f = fit_json(fit_power_law(xs, ys));
        f["operator"] = L ? "L" : "H";
        f["metric"] = metric;
        f["delta"] = d;
        fits.push_back(f);
      }
    }
  res.outputs = {psi.path()};
  res.summary["fits"] = fits;
  return res;
}

CommandResult scan_resolvent(const ExperimentConfig& c) {
  CommandResult res;
  std::vector<double> gammas = c.gamma;
  if (gammas.empty())
    for (double e = -2; e <= 0.001; e += 0.5) gammas.push_back(std::pow(10.0, e));
  const auto scans = parallel_map(c.nu.size(), c.jobs, [&](std::size_t i) {
    std::vector<LLambdaParams> grid;
    for (double g : gammas) grid.push_back(LLambdaParams::make(c.nu[i], g, 0, c.alpha, c.alpha0));
    return resolvent_lower_scan(grid, c.M);
  });
  CsvWriter out(path_in(c, "resolvent.csv"), {"family", "nu", "gamma", "alpha", "alpha0", "M", "lambda_star",
                                              "min_sigma", "normalized"});
  json fits = json::array();
  for (std::size_t i = 0; i < scans.size(); ++i) {
    for (const auto& e : scans[i].entries)
      out.row({std::string("resolvent"), e.params.nu, e.params.gamma, e.params.alpha, e.params.alpha0,
               (long long)c.M, e.lambda_star, e.min_sigma, e.normalized});
    json f = {{"nu", c.nu[i]}, {"alpha", c.alpha}, {"empirical_constant", scans[i].empirical_constant}};
    if (scans[i].has_fit) f["fit"] = fit_json(scans[i].fit);
    fits.push_back(f);
  }
  res.outputs = {out.path()};
  res.summary["scans"] = fits;
  return res;
}

CommandResult decay(const ExperimentConfig& c) {
  CommandResult res;
  const double d = c.delta.front();
  struct Out {
    double nu, T, c_hat;
    ModeTrajectory coupled, heat;
    DissipationIntegrals di;
    DecayFit fu, fw;
  };
  const auto outs = parallel_map(c.nu.size(), c.jobs, [&](std::size_t i) {
    Out o;
    o.nu = c.nu[i];
    const ModeParams p = ModeParams::make(o.nu, d, c.k1, c.k2);
    o.T = c.T > 0 ? c.T : 10 / sqrt_nu(o.nu);
    const double dt = c.dt > 0 ? c.dt : max_mode_dt(p, c.M);
    EvolveOptions eo;
    eo.trunc = c.M;
    eo.sample_every = stride_for(o.T, dt);
    const Eigen::VectorXcd u0 = smooth_mode_data(c.M, 1.0, 0.3);
    const Eigen::VectorXcd w0 = smooth_mode_data(c.M, 0.5, -0.7);
    o.coupled = evolve_coupled(p, u0, w0, o.T, dt, eo);
    o.heat = evolve_heat_H(p, p.m0() * w0 + u0, o.T, dt, eo);
    o.c_hat = pseudospectral_constant(o.nu, d, c.M);
    o.di = dissipation_integrals(o.coupled, 0.5 * o.c_hat);
    std::vector<double> nu_, nw_;
    for (std::size_t j = 0; j < o.coupled.times.size(); ++j) {
      nu_.push_back(o.coupled.u[j].norm());
      nw_.push_back(o.coupled.w[j].norm());
    }
    o.fu = fit_decay_rate(o.coupled.times, nu_);
    o.fw = fit_decay_rate(o.coupled.times, nw_);
    return o;
  });
  CsvWriter traj(path_in(c, "decay.csv"), {"family", "nu", "delta", "k1", "k2", "M", "t", "norm_u", "norm_w",
                                           "norm_s_residual"});
  CsvWriter integ(path_in(c, "dissipation.csv"), {"family", "nu", "delta", "k1", "k2", "M", "T", "cprime",
                                                  "I_plain", "I_weighted", "rate_u", "rate_w"});
  json cells = json::array();
  double worst = 0;
  for (const Out& o : outs) {
    for (std::size_t j = 0; j < o.coupled.times.size(); ++j) {
      const double s_res = (o.coupled.combination(j) - o.heat.u[j]).norm() / std::max(o.heat.u[0].norm(), 1e-300);
      worst = std::max(worst, s_res);
      traj.row({std::string("decay"), o.nu, d, (long long)c.k1, (long long)c.k2, (long long)c.M,
                o.coupled.times[j], o.coupled.u[j].norm(), o.coupled.w[j].norm(), s_res});
    }
    integ.row({std::string("dissipation"), o.nu, d, (long long)c.k1, (long long)c.k2, (long long)c.M, o.T,
               0.5 * o.c_hat, o.di.plain, o.di.weighted, o.fu.rate, o.fw.rate});
    cells.push_back({{"nu", o.nu}, {"I_plain", o.di.plain}, {"I_weighted", o.di.weighted},
                     {"rate_u_over_sqrt_nu", o.fu.rate / sqrt_nu(o.nu)}});
  }
  if (worst > 1e-8) {
    res.verified = false;
    res.failures.push_back("coupled identity residual " + format_double(worst));
  }
  res.summary["cells"] = cells;
  res.summary["max_coupled_identity_residual"] = worst;
  res.outputs = {traj.path(), integ.path()};
  return res;
}

CommandResult delta1(const ExperimentConfig& c) {
  CommandResult res;
  if (c.k1 * c.k1 + c.k2 * c.k2 != 1) throw UsageError("delta1 requires k = (1,0) or (0,1)");
  const auto outs = parallel_map(c.nu.size(), c.jobs, [&](std::size_t i) {
    const double nu = c.nu[i];
    const double T = c.T > 0 ? c.T : 10 / sqrt_nu(nu);
    const ModeParams p = ModeParams::make(nu, 1.0, c.k1, c.k2);
    const double dt = c.dt > 0 ? c.dt : max_mode_dt(p, c.M);
    return delta1_experiment(c.k1, c.k2, nu, T, smooth_mode_data(c.M, 1.0), Eigen::VectorXcd::Zero(2 * c.M + 1),
                             c.M, dt, stride_for(T, dt));
  });
  CsvWriter traj(path_in(c, "delta1.csv"), {"family", "nu", "delta", "k1", "k2", "M", "t", "norm_Q1u",
                                            "norm_P1u", "norm_Q1w", "norm_P1w"});
  json cells = json::array();
  std::vector<double> nus, coupling;
  for (const auto& r : outs) {
    const auto& tr = r.traj;
    for (std::size_t j = 0; j < tr.times.size(); ++j) {
      Eigen::VectorXcd u = tr.u[j], w = tr.w[j];
      const Complex pu = u(r.trunc), pw = w(r.trunc);
      u(r.trunc) = 0;
      w(r.trunc) = 0;
      traj.row({std::string("delta1"), r.nu, 1.0, (long long)r.k1, (long long)r.k2, (long long)r.trunc, tr.times[j],
                u.norm(), std::abs(pu), w.norm(), std::abs(pw)});
    }
    cells.push_back({{"nu", r.nu}, {"rate_Q1u_over_sqrt_nu", r.q1u.rate / sqrt_nu(r.nu)},
                     {"rate_P1u_over_nu", r.p1u.rate / r.nu}, {"p1_coupling", r.p1_coupling}});
    nus.push_back(r.nu);
    coupling.push_back(r.p1_coupling);
  }
  res.summary["cells"] = cells;
  if (nus.size() >= 3) res.summary["p1_coupling_fit"] = fit_json(fit_power_law(nus, coupling));
  res.outputs = {traj.path()};
  return res;
}

CommandResult dns(const ExperimentConfig& c) {
  CommandResult res;
  const double nu = c.nu.front(), d = c.delta.front();
  const TorusGrid grid(c.n1, c.n2, c.ny, d);
  PerturbationSolver solver(grid, nu);
  const double amp = c.amplitude > 0 ? c.amplitude : c.c0 * std::pow(nu, c.beta);
  const SpectralField V0 = init_random(grid, amp, c.seed);
  const double T = c.T > 0 ? c.T : default_horizon(nu);
  const double dt = c.dt > 0 ? c.dt : cfl_dt(solver, 0.0);
  TrajectoryOptions topt;
  topt.sample_every = c.sample_every;
  topt.epsilon = epsilon_for(c, nu, d);
  topt.check_invariants = true;
  const TrajectoryResult r = run_trajectory(solver, V0, T, dt, topt);
  const Verdict v = classify(r, amp, c.classifier);

  CsvWriter diag(path_in(c, "dns.csv"),
                 {"family", "nu", "delta", "n1", "n2", "ny", "seed", "amplitude", "dt", "epsilon", "t", "v3_x0",
                  "d1_lap_v3", "d2_lap_v3", "d1_omega3", "d2_omega3", "V_x0", "lap_P0v1", "lap_P0v2", "d1_lap_V",
                  "d2_lap_V", "d1_lap_p", "d2_lap_p", "energy_nonzero", "E1", "E2"});
  for (const auto& w : r.diagnostics.rows)
    diag.row({std::string("dns"), nu, d, (long long)c.n1, (long long)c.n2, (long long)c.ny, (long long)c.seed, amp,
              dt, topt.epsilon, w.t, w.v3_x0, w.d1_lap_v3, w.d2_lap_v3, w.d1_omega3, w.d2_omega3, w.V_x0,
              w.lap_P0v1, w.lap_P0v2, w.d1_lap_V, w.d2_lap_V, w.d1_lap_p, w.d2_lap_p, w.energy_nonzero, w.E1,
              w.E2});
  const std::string snap = path_in(c, "final_state.hsf");
  write_snapshot(snap, r.state.V);
  const auto& dg = r.diagnostics;
  res.summary = {{"verdict", to_string(v)},
                 {"diverged", r.diverged},
                 {"failure", r.failure},
                 {"steps", r.steps},
                 {"T", r.state.t},
                 {"E1", r.energy.E1},
                 {"E1_initial", r.energy.E1_initial},
                 {"E2_nu_over_x0", r.energy.E2 * nu / amp},
                 {"M1_over_x0_sq", dg.M1 / (amp * amp)},
                 {"M2_nu32_over_x0_sq", dg.M2 * std::pow(nu, 1.5) / (amp * amp)},
                 {"rates_over_sqrt_nu",
                  {dg.rate_d1_lap_v3 / sqrt_nu(nu), dg.rate_d2_lap_v3 / sqrt_nu(nu),
                   dg.rate_d1_omega3 / sqrt_nu(nu), dg.rate_d2_omega3 / sqrt_nu(nu)}},
                 {"max_divergence", dg.max_divergence},
                 {"max_hermitian_defect", dg.max_hermitian_defect}};
  if (dg.max_divergence > 1e-12 || dg.max_hermitian_defect > 1e-12) {
    res.verified = false;
    res.failures.push_back("divergence/Hermitian invariant above 1e-12");
  }
  res.outputs = {diag.path(), snap};
  return res;
}

CommandResult lift_up(const ExperimentConfig& c) {
  CommandResult res;
  const double d = c.delta.front();
  const double amp = c.amplitude > 0 ? c.amplitude : 1e-6;
  const auto outs = parallel_map(c.nu.size(), c.jobs, [&](std::size_t i) {
    const double nu = c.nu[i];
    const double m0 = 1 / d;
    const double T = c.T > 0 ? c.T : 10 / (nu * m0 * m0);
    LiftUpOptions lo;
    lo.dt = c.dt;
    return lift_up_experiment(amp, nu, d, T, lo);
  });
  CsvWriter out(path_in(c, "liftup.csv"), {"family", "c", "nu", "delta", "T", "peak_v1", "peak_v2", "predicted",
                                           "ratio", "max_closed_form_error", "nonlinear_flag"});
  std::vector<double> nus, peaks;
  for (const auto& r : outs) {
    out.row({std::string("liftup"), r.c, r.nu, r.delta, r.T, r.peak_v1, r.peak_v2, r.predicted, r.ratio,
             r.max_closed_form_error, (long long)r.nonlinear_flag});
    nus.push_back(r.nu);
    peaks.push_back(r.peak_v1);
  }
  if (nus.size() >= 3) res.summary["amplification_fit"] = fit_json(fit_power_law(nus, peaks));
  res.outputs = {out.path()};
  return res;
}

CommandResult sweep_threshold(const ExperimentConfig& c) {
  CommandResult res;
  if (c.seeds.size() < 2) throw UsageError("sweep-threshold needs at least two seeds");
  BisectOptions bo;
  bo.iterations = c.iterations;
  bo.horizon = c.T;
  bo.spec.n1 = c.n1;
  bo.spec.n2 = c.n2;
  bo.spec.ny = c.ny;
  bo.spec.delta = c.delta.front();
  bo.spec.sample_every = c.sample_every;
  bo.spec.dt = c.dt;
  bo.classifier = c.classifier;
  const auto sweeps = parallel_map(c.nu.size(), c.jobs, [&](std::size_t i) {
    BisectOptions o = bo;
    o.spec.epsilon = epsilon_for(c, c.nu[i], o.spec.delta);
    return threshold_bisect({c.nu[i]}, c.beta, c.seeds, o);
  });
  CsvWriter rec(path_in(c, "threshold.csv"),
                {"family", "nu", "delta", "n1", "n2", "ny", "seed", "amplitude", "horizon", "extended", "verdict",
                 "E1_initial", "E1_max", "E2_max", "residual_energy_fraction", "stable_growth", "residual_energy",
                 "unstable_growth"});
  CsvWriter crit(path_in(c, "threshold_critical.csv"),
                 {"family", "nu", "delta", "n1", "n2", "ny", "seed", "stable", "unstable", "estimate"});
  std::vector<double> xs, ys;
  for (const auto& s : sweeps) {
    for (const auto& r : s.records)
      rec.row({std::string("threshold"), r.nu, c.delta.front(), (long long)c.n1, (long long)c.n2, (long long)c.ny,
               (long long)r.seed, r.amplitude, r.horizon, (long long)r.extended, to_string(r.verdict), r.E1_initial,
               r.E1_max, r.E2_max, r.residual_energy_fraction, c.classifier.stable_growth,
               c.classifier.residual_energy, c.classifier.unstable_growth});
    for (const auto& a : s.critical) {
      crit.row({std::string("threshold_critical"), a.nu, c.delta.front(), (long long)c.n1, (long long)c.n2,
                (long long)c.ny, (long long)a.seed, a.stable, a.unstable, a.estimate});
      xs.push_back(a.nu);
      ys.push_back(a.estimate);
    }
  }
  if (c.nu.size() >= 2 && xs.size() >= 3) {
    const PowerLawFit f = fit_power_law(xs, ys);
    res.summary["fit"] = fit_json(f);
    res.summary["slope_band"] = {f.slope - 2 * f.slope_stderr, f.slope + 2 * f.slope_stderr};
  }
  res.outputs = {rec.path(), crit.path()};
  return res;
}

CommandResult audit(const ExperimentConfig& c) {
  CommandResult res;
  const AuditReport r = inequality_audit(c.samples, c.seed);
  CsvWriter out(path_in(c, "audit.csv"), {"family", "inequality", "samples", "seed", "resampled", "max_ratio",
                                          "mean_ratio"});
  for (const auto& s : r.stats) {
    out.row({std::string("audit"), s.name, (long long)r.samples, (long long)r.seed, (long long)r.resampled,
             s.max_ratio, s.mean_ratio});
    if (!std::isfinite(s.max_ratio)) {
      res.verified = false;
      res.failures.push_back("non-finite ratio for " + s.name);
    }
  }
  res.outputs = {out.path()};
  return res;
}

int run(const ExperimentConfig& c, std::ostream& log) {
  validate(c);
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out)) throw UsageError("cannot create output directory '" + c.out + "'");
  {
    std::ofstream probe(fs::path(c.out) / ".write_test");
    if (!probe) throw UsageError("output directory '" + c.out + "' is not writable");
  }
  fs::remove(fs::path(c.out) / ".write_test", ec);

  const auto t0 = std::chrono::steady_clock::now();
  CommandResult r;
  const std::string& cmd = c.command;
  if (cmd == "verify-linear") r = verify_linear(c);
  else if (cmd == "scan-psi") r = scan_psi(c);
  else if (cmd == "scan-resolvent") r = scan_resolvent(c);
  else if (cmd == "decay") r = decay(c);
  else if (cmd == "delta1") r = delta1(c);
  else if (cmd == "dns") r = dns(c);
  else if (cmd == "lift-up") r = lift_up(c);
  else if (cmd == "sweep-threshold") r = sweep_threshold(c);
  else if (cmd == "audit") r = audit(c);
  else r = report(c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(c)));
  json manifest = {{"command", cmd},
                   {"config_hash", hash},
                   {"config", serialize(c)},
                   {"versions",
                    {{"helistab", HELISTAB_VERSION},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"fft", fft_backend_version()},
                     {"compiler", __VERSION__}}},
                   {"wall_time_s", wall},
                   {"outputs", r.outputs},
                   {"verified", r.verified},
                   {"failures", r.failures},
                   {"summary", r.summary}};
  const fs::path mpath = fs::path(c.out) / "manifest.json";
  std::ofstream(mpath) << manifest.dump(2) << '\n';
  log << cmd << ": " << (r.verified ? "ok" : "VERIFICATION FAILED") << " (" << wall << " s)\n";
  for (const auto& f : r.failures) log << "  " << f << '\n';
  for (const auto& o : r.outputs) log << "  wrote " << o << '\n';
  log << "  wrote " << mpath.string() << '\n';
  return r.verified ? 0 : 2;
}

}  // namespace helistab::cli
