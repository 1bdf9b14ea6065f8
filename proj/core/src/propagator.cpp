#include "helistab/propagator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>

#include "helistab/error.hpp"

namespace helistab {

namespace {

Metric natural_metric(const ModeParams& p) {
  return p.alpha2() > 1 ? Metric::star : Metric::euclidean;
}

// Uniform steps of dt; the last one is shortened to land on T.
struct StepPlan {
  std::size_t steps;
  double last;
};

StepPlan plan_steps(double T, double dt) {
  require(T >= 0 && dt > 0, "evolve: need T >= 0 and dt > 0");
  if (T == 0) return {0, dt};
  const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  return {n, T - double(n - 1) * dt};
}

void check_dt(const ModeParams& p, int M, double dt) {
  require(dt <= max_mode_dt(p, M) * (1 + 1e-12),
          "evolve: dt exceeds min(0.1/(|k|delta^2), 0.1/(nu m0^2 M^2))");
}

// Generic driver: x' = -A x, samples every `every` steps and at T.
template <class Sink>
void run_exponential(const Eigen::MatrixXcd& A, Eigen::VectorXcd x, double T, double dt,
                     std::size_t every, double growth_abort, Sink&& sink) {
  const StepPlan plan = plan_steps(T, dt);
  const Eigen::MatrixXcd E = (-dt * A).exp();
  const Eigen::MatrixXcd Elast = plan.last == dt ? E : Eigen::MatrixXcd((-plan.last * A).exp());
  const double n0 = x.norm();
  sink(0.0, x);
  for (std::size_t s = 1; s <= plan.steps; ++s) {
    x = (s == plan.steps ? Elast : E) * x;
    if (!x.allFinite()) throw NumericalError("evolve: non-finite state");
    if (n0 > 0 && x.norm() > growth_abort * n0)
      throw NumericalError("evolve: norm growth beyond the abort threshold");
    if (s % every == 0 || s == plan.steps)
      sink(s == plan.steps ? T : double(s) * dt, x);
  }
}

ModeTrajectory empty_trajectory(const ModeParams& p, int M, Metric metric, double dt,
                                std::size_t every) {
  ModeTrajectory tr;
  tr.params = p;
  tr.trunc = M;
  tr.metric = metric;
  tr.dt = dt;
  tr.sample_every = every;
  return tr;
}

Eigen::MatrixXcd shifted(const OperatorMatrix& A, double shift) {
  Eigen::MatrixXcd B = A.entries;
  B.diagonal().array() += shift;
  return B;
}

}  // namespace

Eigen::VectorXcd ModeTrajectory::combination(std::size_t i) const {
  require(coupled(), "combination: trajectory is not coupled");
  return params.m0() * w.at(i) + u.at(i);
}

double max_mode_dt(const ModeParams& p, int M) {
  const double adv = p.kabs() * p.delta * p.delta;
  const double diff = p.nu * p.m0() * p.m0() * double(M) * M;
  double dt = std::numeric_limits<double>::infinity();
  if (adv > 0) dt = std::min(dt, 0.1 / adv);
  if (diff > 0) dt = std::min(dt, 0.1 / diff);
  return dt;
}

Eigen::MatrixXcd coupling_matrix(const ModeParams& p, int M, double advection_scale) {
  const Eigen::Index n = 2 * M + 1;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  const double amp = 0.5 * advection_scale * p.kabs() * std::pow(p.delta, 3);
  const double a = p.alpha_k();
  for (int m = -M; m <= M; ++m) {
    const double r = 1.0 / (p.alpha2() + double(m) * m);
    if (m < M) C(m + M + 1, m + M) = amp * std::polar(1.0, a) * r;
    if (m > -M) C(m + M - 1, m + M) = -amp * std::polar(1.0, -a) * r;
  }
  return C;
}

ModeTrajectory evolve_mode(const ModeParams& p, const Eigen::VectorXcd& u0, double T, double dt,
                           const EvolveOptions& opt) {
  require(!p.is_zero_mode(), "evolve_mode: k = (0,0)");
  require(u0.size() == 2 * opt.trunc + 1, "evolve_mode: u0 size must be 2M+1");
  check_dt(p, opt.trunc, dt);
  AssemblyOptions ao;
  ao.advection_scale = opt.advection_scale;
  const OperatorMatrix L = assemble_L(p, opt.trunc, natural_metric(p), ao);
  ModeTrajectory tr = empty_trajectory(p, opt.trunc, L.metric, dt, opt.sample_every);
  run_exponential(shifted(L, p.nu * p.kabs2()), u0, T, dt, opt.sample_every, opt.growth_abort,
                  [&](double t, const Eigen::VectorXcd& x) {
                    tr.times.push_back(t);
                    tr.u.push_back(x);
                  });
  return tr;
}

ModeTrajectory evolve_heat_H(const ModeParams& p, const Eigen::VectorXcd& s0, double T, double dt,
                             const EvolveOptions& opt) {
  require(!p.is_zero_mode(), "evolve_heat_H: k = (0,0)");
  require(s0.size() == 2 * opt.trunc + 1, "evolve_heat_H: s0 size must be 2M+1");
  check_dt(p, opt.trunc, dt);
  AssemblyOptions ao;
  ao.advection_scale = opt.advection_scale;
  const OperatorMatrix H = assemble_H(p, opt.trunc, ao);
  ModeTrajectory tr = empty_trajectory(p, opt.trunc, Metric::euclidean, dt, opt.sample_every);
  run_exponential(shifted(H, p.nu * p.kabs2()), s0, T, dt, opt.sample_every, opt.growth_abort,
                  [&](double t, const Eigen::VectorXcd& x) {
                    tr.times.push_back(t);
                    tr.u.push_back(x);
                  });
  return tr;
}

ModeTrajectory evolve_coupled(const ModeParams& p, const Eigen::VectorXcd& u0,
                              const Eigen::VectorXcd& w0, double T, double dt,
                              const EvolveOptions& opt) {
  require(!p.is_zero_mode(), "evolve_coupled: k = (0,0)");
  const int M = opt.trunc;
  const Eigen::Index n = 2 * M + 1;
  require(u0.size() == n && w0.size() == n, "evolve_coupled: data size must be 2M+1");
  check_dt(p, M, dt);
  AssemblyOptions ao;
  ao.advection_scale = opt.advection_scale;
  const OperatorMatrix L = assemble_L(p, M, natural_metric(p), ao);
  const OperatorMatrix H = assemble_H(p, M, ao);
  const double damp = p.nu * p.kabs2();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  A.topLeftCorner(n, n) = shifted(L, damp);
  A.bottomRightCorner(n, n) = shifted(H, damp);
  A.bottomLeftCorner(n, n) = coupling_matrix(p, M, opt.advection_scale);
  Eigen::VectorXcd x(2 * n);
  x << u0, w0;
  ModeTrajectory tr = empty_trajectory(p, M, L.metric, dt, opt.sample_every);
  // The growth guard applies to the joint state; w may legitimately grow
  // transiently by O(delta) relative to u, so scale the threshold.
  run_exponential(A, x, T, dt, opt.sample_every, opt.growth_abort * (1 + p.delta),
                  [&](double t, const Eigen::VectorXcd& s) {
                    tr.times.push_back(t);
                    tr.u.push_back(s.head(n));
                    tr.w.push_back(s.tail(n));
                  });
  return tr;
}

DissipationIntegrals dissipation_integrals(const ModeTrajectory& traj, double cprime) {
  require(!traj.times.empty(), "dissipation_integrals: empty trajectory");
  require(cprime >= 0, "dissipation_integrals: c' must be >= 0");
  const ModeParams& p = traj.params;
  const int M = traj.trunc;
  const double u0 = traj.u.front().squaredNorm();
  if (u0 == 0) return {};
  auto integrand = [&](std::size_t i) {
    double s = 0;
    for (int m = -M; m <= M; ++m)
      s += (p.alpha2() + double(m) * m) * std::norm(traj.u[i](m + M));
    return p.nu * p.m0() * p.m0() * s;
  };
  const double rate = 2 * cprime * std::sqrt(p.nu) * std::sqrt(p.kabs());
  DissipationIntegrals out;
  double fprev = integrand(0), tprev = traj.times[0];
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    const double f = integrand(i), t = traj.times[i], h = t - tprev;
    out.plain += 0.5 * h * (f + fprev);
    out.weighted += 0.5 * h * (f * std::exp(rate * t) + fprev * std::exp(rate * tprev));
    fprev = f;
    tprev = t;
  }
  out.plain /= u0;
  out.weighted /= u0;
  return out;
}

Complex ForcingPulse::envelope(double t) const {
  const double z = (t - t0) / width;
  return amplitude * std::exp(-0.5 * z * z);
}

ForcedEdReport forced_ed_check(const ModeParams& p, const Eigen::VectorXcd& u0,
                               const ForcingPulse& F, double T, const ForcedEdOptions& opt) {
  require(!p.is_zero_mode(), "forced_ed_check: P0 F = 0 and P0 u(0) = 0 need k != (0,0)");
  require(F.component >= 0 && F.component <= 2, "forced_ed_check: component must be 0, 1 or 2");
  const int M = opt.trunc;
  require(std::abs(F.m) <= M, "forced_ed_check: pulse mode outside truncation");
  const Eigen::Index n = 2 * M + 1;
  require(u0.size() == n, "forced_ed_check: u0 size must be 2M+1");
  double dt = opt.dt > 0 ? opt.dt : max_mode_dt(p, M);
  check_dt(p, M, dt);

  const double damp = p.nu * p.kabs2();
  const bool coupled = opt.system == ForcedSystem::coupled;
  const Eigen::Index N = coupled ? 2 * n : n;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  const Metric metric = natural_metric(p);
  switch (opt.system) {
    case ForcedSystem::heat_H: A = shifted(assemble_H(p, M), damp); break;
    case ForcedSystem::L_equation: A = shifted(assemble_L(p, M, metric), damp); break;
    case ForcedSystem::coupled:
      A.topLeftCorner(n, n) = shifted(assemble_L(p, M, metric), damp);
      A.bottomRightCorner(n, n) = shifted(assemble_H(p, M), damp);
      A.bottomLeftCorner(n, n) = coupling_matrix(p, M);
      break;
  }

  // div F for a unit envelope.
  const double kdir = F.component == 0 ? p.k1 : F.component == 1 ? p.k2 : F.m * p.m0();
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(N);
  b(F.m + M) = Complex(0, kdir);
  if (coupled) b(n + F.m + M) = Complex(0, kdir);

  auto grad_sq = [&](const Eigen::VectorXcd& v) {
    double s = 0;
    for (int m = -M; m <= M; ++m) s += (p.kabs2() + m * m * p.m0() * p.m0()) * std::norm(v(m + M));
    return s;
  };

  require(T > 0, "forced_ed_check: T must be positive");
  // Round dt down so the horizon is a whole number of steps.
  const StepPlan plan{static_cast<std::size_t>(std::ceil(T / dt - 1e-9)), 0};
  dt = T / double(plan.steps);
  const Eigen::MatrixXcd E = (-dt * A).exp();
  const Eigen::MatrixXcd Eh = (-0.5 * dt * A).exp() * b;  // column: E(dt/2) div F

  const double eps_rate = opt.epsilon * std::sqrt(p.nu);
  double sup_u = 0, int_u = 0, int_gu = 0, sup_w = 0, int_w = 0, int_gw = 0, force = 0;
  double prev_lu = 0, prev_gu = 0, prev_lw = 0, prev_gw = 0, prev_f = 0;
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(N);
  x.head(n) = u0;
  // Per-sample bookkeeping, trapezoid in time.
  auto record = [&](std::size_t s, double t) {
    const double w2 = std::exp(2 * eps_rate * t);
    const Eigen::VectorXcd u = x.head(n);
    const double lu = w2 * u.squaredNorm(), gu = w2 * grad_sq(u);
    const double fe = w2 * std::norm(F.envelope(t));
    double lw = 0, gw = 0;
    if (coupled) {
      const Eigen::VectorXcd w = x.tail(n);
      lw = w2 * w.squaredNorm();
      gw = w2 * grad_sq(w);
    }
    if (s > 0) {
      int_u += 0.5 * dt * (lu + prev_lu);
      int_gu += 0.5 * dt * (gu + prev_gu);
      int_w += 0.5 * dt * (lw + prev_lw);
      int_gw += 0.5 * dt * (gw + prev_gw);
      force += 0.5 * dt * (fe + prev_f);
    }
    sup_u = std::max(sup_u, lu);
    sup_w = std::max(sup_w, lw);
    prev_lu = lu, prev_gu = gu, prev_lw = lw, prev_gw = gw, prev_f = fe;
  };
  record(0, 0.0);
  for (std::size_t s = 1; s <= plan.steps; ++s) {
    const double tm = (double(s) - 0.5) * dt;
    x = E * x + dt * F.envelope(tm) * Eh.col(0);
    if (!x.allFinite()) throw NumericalError("forced_ed_check: non-finite state");
    record(s, double(s) * dt);
  }

  ForcedEdReport r;
  r.steps = plan.steps;
  r.initial_sq = u0.squaredNorm();
  r.forcing_sq = force;
  const double sqnu = std::sqrt(p.nu);
  r.xed_sq = sup_u + sqnu * int_u + p.nu * int_gu;
  r.ratio = r.xed_sq / (r.initial_sq + force / p.nu);
  if (coupled) {
    r.xed_w_sq = sup_w + sqnu * int_w + p.nu * int_gw;
    r.ratio_w = r.xed_w_sq / (r.initial_sq + 2 * force / p.nu);
  }
  return r;
}

Eigen::VectorXcd smooth_mode_data(int M, Complex constant, double phase) {
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(2 * M + 1);
  for (int m = -M; m <= M; ++m) {
    if (m == 0) continue;
    u(m + M) = std::exp(-0.25 * m * m) * std::polar(1.0, phase * m);
  }
  u(M) = constant;
  return u;
}

Delta1Report delta1_experiment(int k1, int k2, double nu, double T, const Eigen::VectorXcd& u0,
                               const Eigen::VectorXcd& w0, int M, double dt,
                               std::size_t sample_every) {
  require(k1 * k1 + k2 * k2 == 1, "delta1_experiment: need k1^2 + k2^2 = 1");
  const ModeParams p = ModeParams::make(nu, 1.0, k1, k2);
  EvolveOptions opt;
  opt.trunc = M;
  opt.sample_every = sample_every;
  Delta1Report r;
  r.nu = nu;
  r.k1 = k1;
  r.k2 = k2;
  r.T = T;
  r.trunc = M;
  r.traj = evolve_coupled(p, u0, w0, T, dt, opt);

  std::vector<double> q1u, p1u, q1w, p1w;
  const Complex p1u0 = u0(M);
  Eigen::VectorXcd q0 = u0;
  q0(M) = 0;
  const double q1u0 = q0.norm();
  for (std::size_t i = 0; i < r.traj.times.size(); ++i) {
    const auto& u = r.traj.u[i];
    const auto& w = r.traj.w[i];
    // Q1 norms without the constant mode; subtracting |P1|^2 would cancel catastrophically.
    p1u.push_back(std::abs(u(M)));
    q1u.push_back(std::hypot(u.head(M).norm(), u.tail(M).norm()));
    p1w.push_back(std::abs(w(M)));
    q1w.push_back(std::hypot(w.head(M).norm(), w.tail(M).norm()));
    const double t = r.traj.times[i];
    if (q1u0 > 0)
      r.p1_coupling = std::max(r.p1_coupling,
                               std::exp(nu * t) * std::abs(u(M) - std::exp(-nu * t) * p1u0) / q1u0);
  }
  auto fit = [&](const std::vector<double>& v) {
    for (double x : v)
      if (!(x > 0)) return DecayFit{};
    return fit_decay_rate(r.traj.times, v);
  };
  r.q1u = fit(q1u);
  r.p1u = fit(p1u);
  r.q1w = fit(q1w);
  r.p1w = fit(p1w);
  return r;
}

}  // namespace helistab
