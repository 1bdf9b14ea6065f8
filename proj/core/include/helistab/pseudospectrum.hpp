#pragma once

#include <functional>
#include <span>
#include <vector>

#include "helistab/fit.hpp"
#include "helistab/operators.hpp"

namespace helistab {

enum class SingularBackend { automatic, dense, banded };

// sigma_min(G^{1/2}(A - i lambda)G^{-1/2}). Dense SVD is the reference; the
// banded path (tridiagonal LU + Lanczos) is used by `automatic` for
// tridiagonal matrices larger than 65x65.
double smallest_singular(const OperatorMatrix& A, double lambda,
                         SingularBackend backend = SingularBackend::automatic);

struct PsiOptions {
  int coarse_points = 401;
  double tol = 1e-8;
  double margin = 1.0;  // window half-width = |amplitude| + margin
  SingularBackend backend = SingularBackend::automatic;
};

struct PsiResult {
  double psi = 0;
  double lambda_star = 0;
  double window_lo = 0, window_hi = 0;
  double tol = 0;
  Metric metric = Metric::euclidean;
  int trunc = 0;
  double coarse_min = 0;  // smallest sampled value on the coarse grid
  int basins = 0;         // local minima refined
};

PsiResult psi_bound(const OperatorMatrix& A, const PsiOptions& opt = {});
// Minimum of sigma_min(A - i mu) over mu in [lo, hi].
PsiResult minimize_shifted_singular(const OperatorMatrix& A, double lo, double hi,
                                    const PsiOptions& opt = {});

// Repeats psi_bound at M, 2M, 4M, ... until consecutive values agree to rtol.
struct ConvergedPsi {
  PsiResult result;      // at the larger truncation of the agreeing pair
  int M = 0;             // smaller truncation of the agreeing pair
  double rel_change = 0;
  bool converged = false;
};
ConvergedPsi psi_bound_converged(const std::function<OperatorMatrix(int)>& assemble, int M0 = 64,
                                 double rtol = 1e-6, int Mmax = 1024, const PsiOptions& opt = {});

struct ResolventEntry {
  LLambdaParams params;
  double min_sigma = 0;
  double lambda_star = 0;
  double normalized = 0;  // min_sigma / (|gamma|^{1/2}(1 - alpha^{-2}))
};

struct ResolventScan {
  std::vector<ResolventEntry> entries;
  double empirical_constant = 0;   // min normalized value
  bool has_fit = false;            // needs >= 3 distinct gamma at common (nu, alpha)
  PowerLawFit fit;                 // log min_sigma vs log |gamma|
};

// For each entry, minimizes over lambda in [-1 - margin, 1 + margin].
ResolventScan resolvent_lower_scan(std::span<const LLambdaParams> grid, int M, double margin = 1.0,
                                   SingularBackend backend = SingularBackend::automatic);

// ||exp(-tA)|| in the metric attached to A.
std::vector<double> semigroup_norm(const OperatorMatrix& A, std::span<const double> times);

// Empirical decay constant c_hat = min(Psi(H), Psi_*(L)) / (|k|^{1/2} nu^{1/2}) at k = (1, 0).
double pseudospectral_constant(double nu, double delta, int M = 64);

}  // namespace helistab
