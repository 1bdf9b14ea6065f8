#include "helistab/pseudospectrum.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

#include "helistab/error.hpp"
#include "helistab/tridiagonal.hpp"

namespace helistab {

namespace {

Eigen::MatrixXcd similarity(const OperatorMatrix& A) {
  if (A.metric == Metric::euclidean) return A.entries;
  const Eigen::VectorXd s = A.gram.array().sqrt();
  return s.asDiagonal() * A.entries * s.cwiseInverse().asDiagonal();
}

}  // namespace

double smallest_singular(const OperatorMatrix& A, double lambda, SingularBackend backend) {
  require(A.entries.rows() == A.entries.cols(), "smallest_singular: square matrix required");
  Eigen::MatrixXcd B = similarity(A);
  B.diagonal().array() -= Complex(0, lambda);
  if (backend == SingularBackend::automatic)
    backend = (B.rows() > 65 && A.is_tridiagonal()) ? SingularBackend::banded : SingularBackend::dense;
  if (backend == SingularBackend::banded) {
    require(A.is_tridiagonal(), "smallest_singular: banded backend needs a tridiagonal matrix");
    return smallest_singular_tridiagonal(B);
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(B);
  return svd.singularValues().minCoeff();
}

PsiResult minimize_shifted_singular(const OperatorMatrix& A, double lo, double hi,
                                    const PsiOptions& opt) {
  require(hi > lo, "psi: empty window");
  require(opt.coarse_points >= 5, "psi: need at least 5 coarse points");
  auto f = [&](double lam) { return smallest_singular(A, lam, opt.backend); };

  for (int attempt = 0; attempt < 2; ++attempt) {
    const int n = opt.coarse_points;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = lo + (hi - lo) * i / (n - 1);
      y[i] = f(x[i]);
    }
    const auto imin = std::ranges::min_element(y) - y.begin();
    if (imin == 0 || imin == n - 1) {
      // Minimum on the boundary: the window did not bracket it.
      const double c = 0.5 * (lo + hi), h = hi - lo;
      lo = c - h;
      hi = c + h;
      continue;
    }
    PsiResult r;
    r.window_lo = lo;
    r.window_hi = hi;
    r.tol = opt.tol;
    r.metric = A.metric;
    r.trunc = A.trunc;
    r.coarse_min = y[imin];
    r.psi = y[imin];
    r.lambda_star = x[imin];
    for (int i = 1; i + 1 < n; ++i) {
      if (!(y[i] <= y[i - 1] && y[i] <= y[i + 1])) continue;
      double fm = 0;
      const double xm = golden_section_minimize(f, x[i - 1], x[i + 1], opt.tol, &fm);
      ++r.basins;
      if (fm < r.psi) {
        r.psi = fm;
        r.lambda_star = xm;
      }
    }
    return r;
  }
  throw NumericalError("psi: refinement failed to bracket a minimum after widening the window");
}

PsiResult psi_bound(const OperatorMatrix& A, const PsiOptions& opt) {
  const double h = std::abs(A.symbol.amplitude) + opt.margin;
  return minimize_shifted_singular(A, -h, h, opt);
}

ConvergedPsi psi_bound_converged(const std::function<OperatorMatrix(int)>& assemble, int M0,
                                 double rtol, int Mmax, const PsiOptions& opt) {
  ConvergedPsi out;
  int M = M0;
  PsiResult prev = psi_bound(assemble(M), opt);
  while (2 * M <= Mmax) {
    PsiResult next = psi_bound(assemble(2 * M), opt);
    out.rel_change = std::abs(next.psi - prev.psi) / std::max(next.psi, 1e-300);
    out.result = next;
    out.M = M;
    if (out.rel_change <= rtol) {
      out.converged = true;
      return out;
    }
    prev = next;
    M *= 2;
  }
  return out;
}

ResolventScan resolvent_lower_scan(std::span<const LLambdaParams> grid, int M, double margin,
                                   SingularBackend backend) {
  require(!grid.empty(), "resolvent_lower_scan: empty grid");
  ResolventScan scan;
  scan.empirical_constant = std::numeric_limits<double>::infinity();
  PsiOptions opt;
  opt.backend = backend;
  for (const LLambdaParams& p0 : grid) {
    LLambdaParams p = p0;
    p.lambda = 0;
    const OperatorMatrix A = assemble_L_lambda(p, M);
    // Shift mu = (gamma/nu) lambda.
    const double scale = std::abs(p.gamma / p.nu);
    const PsiResult r = minimize_shifted_singular(A, -(1 + margin) * scale, (1 + margin) * scale, opt);
    ResolventEntry e;
    e.params = p0;
    e.min_sigma = r.psi;
    e.lambda_star = r.lambda_star / (p.gamma / p.nu);
    e.normalized = r.psi / (std::sqrt(std::abs(p.gamma)) * (1 - 1 / (p.alpha * p.alpha)));
    scan.empirical_constant = std::min(scan.empirical_constant, e.normalized);
    scan.entries.push_back(e);
  }
  // Slope against |gamma| when the grid shares (nu, alpha).
  bool common = true;
  for (const auto& e : scan.entries)
    common = common && e.params.nu == grid[0].nu && e.params.alpha == grid[0].alpha;
  if (common) {
    std::vector<double> g, s;
    for (const auto& e : scan.entries) {
      if (std::ranges::find(g, std::abs(e.params.gamma)) != g.end()) continue;
      g.push_back(std::abs(e.params.gamma));
      s.push_back(e.min_sigma);
    }
    if (g.size() >= 3) {
      scan.fit = fit_power_law(g, s);
      scan.has_fit = true;
    }
  }
  return scan;
}

std::vector<double> semigroup_norm(const OperatorMatrix& A, std::span<const double> times) {
  const Eigen::MatrixXcd B = similarity(A);
  std::vector<double> out;
  out.reserve(times.size());
  // Propagates E(t_j) = exp(-(t_j - t_{j-1}) B) E(t_{j-1}); the step exponential is reused
  // while the spacing repeats, so a uniform grid costs one exponential plus a product per time.
  const Eigen::Index n = B.rows();
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Identity(n, n), step;
  double prev = 0, step_h = -1;
  for (double t : times) {
    require(t >= 0 && t >= prev, "semigroup_norm: times must be ascending and >= 0");
    const double h = t - prev;
    prev = t;
    if (h > 0) {
      if (std::abs(h - step_h) > 1e-12 * h) {
        step = (-h * B).exp();
        step_h = h;
      }
      E = step * E;
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(E);
    out.push_back(svd.singularValues()(0));
  }
  return out;
}

double pseudospectral_constant(double nu, double delta, int M) {
  const ModeParams p = ModeParams::make(nu, delta, 1, 0);
  const double h = psi_bound(assemble_H(p, M)).psi;
  const double l = psi_bound(assemble_L(p, M, p.alpha2() > 1 ? Metric::star : Metric::euclidean)).psi;
  return std::min(h, l) / std::sqrt(nu);
}

}  // namespace helistab
