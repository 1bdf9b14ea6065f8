#pragma once

#include <Eigen/Dense>
#include <optional>

#include "helistab/grid.hpp"

namespace helistab {

enum class Metric { euclidean, star };
const char* to_string(Metric m);

// Symbol of a reduced operator on T_{2pi}, basis e^{imy}:
//   -diffusion d_y^2 + i amplitude sin(y + phase) (1 - nonlocal (alpha2 - d_y^2)^{-1}) - i shift
// The resolvent factor 1 - 1/(alpha2 + m^2) acts first, so it carries the
// column index.
struct ReducedSymbol {
  double diffusion = 0;
  double amplitude = 0;
  double phase = 0;
  bool nonlocal = false;
  double alpha2 = 0;
  double shift = 0;
};

struct LLambdaParams {
  double nu = 0;
  double gamma = 0;
  double lambda = 0;
  double alpha = 0;
  double alpha0 = 0;

  // Enforces nu in (0,1], |alpha| > 1, alpha0 in [0, 2pi), |gamma| >= 10 nu^2.
  static LLambdaParams make(double nu, double gamma, double lambda, double alpha, double alpha0);
  // |gamma| < 100 nu^2: allowed but outside the comfortable regime.
  bool weakly_separated() const;
};

struct OperatorMatrix {
  int trunc = 0;
  Metric metric = Metric::euclidean;
  Eigen::MatrixXcd entries;
  Eigen::VectorXd gram;  // diagonal Gram matrix; ones in the euclidean metric
  ReducedSymbol symbol;
  std::optional<ModeParams> mode;
  std::optional<LLambdaParams> llambda;

  Eigen::Index size() const { return entries.rows(); }
  Eigen::Index index(int m) const { return m + trunc; }
  bool is_tridiagonal() const;
};

struct AssemblyOptions {
  double advection_scale = 1.0;       // 0 gives the diffusion-only test matrix
  std::optional<double> alpha_k;      // replaces the phase derived from (k1, k2)
};

OperatorMatrix assemble_reduced(const ReducedSymbol& s, int M, Metric metric);
OperatorMatrix assemble_H(const ModeParams& p, int M, const AssemblyOptions& opt = {});
OperatorMatrix assemble_L(const ModeParams& p, int M, Metric metric = Metric::star,
                          const AssemblyOptions& opt = {});
OperatorMatrix assemble_L_lambda(const LLambdaParams& p, int M);
OperatorMatrix assemble_star_gram(double alpha2, int M);

// Diagonal unitary D = diag(e^{i m phase}); returns D A D^{-1}.
OperatorMatrix conjugate_by_phase(const OperatorMatrix& A, double phase);

// |Re<Au,u>_G - diffusion sum_m G_m m^2 |u_m|^2| / (|u|_G^2 + tiny).
double accretivity_residual(const OperatorMatrix& A, const Eigen::VectorXcd& u);

double metric_norm_sq(const OperatorMatrix& A, const Eigen::VectorXcd& u);

}  // namespace helistab
