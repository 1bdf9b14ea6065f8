#include "helistab/operators.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

#include "helistab/error.hpp"

namespace helistab {

const char* to_string(Metric m) { return m == Metric::star ? "star" : "euclidean"; }

LLambdaParams LLambdaParams::make(double nu, double gamma, double lambda, double alpha,
                                  double alpha0) {
  require(nu > 0 && nu <= 1, "LLambdaParams: nu must lie in (0,1]");
  require(std::abs(alpha) > 1, "LLambdaParams: |alpha| must exceed 1");
  require(alpha0 >= 0 && alpha0 < 2 * std::numbers::pi, "LLambdaParams: alpha0 must lie in [0,2pi)");
  require(std::abs(gamma) >= 10 * nu * nu, "LLambdaParams: |gamma| must be >= 10 nu^2");
  require(std::isfinite(lambda), "LLambdaParams: lambda must be finite");
  return LLambdaParams{nu, gamma, lambda, alpha, alpha0};
}

bool LLambdaParams::weakly_separated() const { return std::abs(gamma) < 100 * nu * nu; }

bool OperatorMatrix::is_tridiagonal() const {
  for (Eigen::Index j = 0; j < size(); ++j)
    for (Eigen::Index i = 0; i < size(); ++i)
      if (std::abs(i - j) > 1 && entries(i, j) != Complex{}) return false;
  return true;
}

OperatorMatrix assemble_reduced(const ReducedSymbol& s, int M, Metric metric) {
  require(M >= 2, "assemble: truncation M must be >= 2");
  if (metric == Metric::star)
    require(s.alpha2 > 1, "assemble: the star metric needs alpha^2 > 1");
  const Eigen::Index n = 2 * M + 1;
  OperatorMatrix A;
  A.trunc = M;
  A.metric = metric;
  A.symbol = s;
  A.entries = Eigen::MatrixXcd::Zero(n, n);
  A.gram = Eigen::VectorXd::Ones(n);
  const Complex up = 0.5 * s.amplitude * std::polar(1.0, s.phase);
  const Complex down = -0.5 * s.amplitude * std::polar(1.0, -s.phase);
  for (int m = -M; m <= M; ++m) {
    const Eigen::Index j = A.index(m);
    const double f = s.nonlocal ? 1.0 - 1.0 / (s.alpha2 + double(m) * m) : 1.0;
    A.entries(j, j) = Complex(s.diffusion * m * m, -s.shift);
    if (m < M) A.entries(j + 1, j) = up * f;
    if (m > -M) A.entries(j - 1, j) = down * f;
    if (metric == Metric::star) A.gram(j) = 1.0 - 1.0 / (s.alpha2 + double(m) * m);
  }
  return A;
}

namespace {

ReducedSymbol mode_symbol(const ModeParams& p, const AssemblyOptions& opt, bool nonlocal) {
  require(!p.is_zero_mode(), "assemble: k = (0,0) has no reduced operator");
  ReducedSymbol s;
  s.diffusion = p.nu * p.m0() * p.m0();
  s.amplitude = opt.advection_scale * p.kabs() * p.delta * p.delta;
  s.phase = opt.alpha_k.value_or(p.alpha_k());
  s.nonlocal = nonlocal;
  s.alpha2 = p.alpha2();
  return s;
}

}  // namespace

OperatorMatrix assemble_H(const ModeParams& p, int M, const AssemblyOptions& opt) {
  OperatorMatrix A = assemble_reduced(mode_symbol(p, opt, false), M, Metric::euclidean);
  A.mode = p;
  return A;
}

OperatorMatrix assemble_L(const ModeParams& p, int M, Metric metric, const AssemblyOptions& opt) {
  OperatorMatrix A = assemble_reduced(mode_symbol(p, opt, true), M, metric);
  A.mode = p;
  return A;
}

OperatorMatrix assemble_L_lambda(const LLambdaParams& p, int M) {
  require(p.nu > 0 && p.nu <= 1 && std::abs(p.alpha) > 1, "assemble_L_lambda: invalid parameters");
  if (p.weakly_separated())
    std::cerr << "warning: |gamma| < 100 nu^2; resolvent bound regime is marginal\n";
  ReducedSymbol s;
  s.diffusion = p.nu;
  s.amplitude = p.gamma / p.nu;
  s.phase = p.alpha0;
  s.nonlocal = true;
  s.alpha2 = p.alpha * p.alpha;
  s.shift = p.gamma / p.nu * p.lambda;
  OperatorMatrix A = assemble_reduced(s, M, Metric::euclidean);
  A.llambda = p;
  return A;
}

OperatorMatrix assemble_star_gram(double alpha2, int M) {
  require(alpha2 > 1, "assemble_star_gram: alpha^2 must exceed 1");
  require(M >= 0, "assemble_star_gram: M must be >= 0");
  OperatorMatrix G;
  G.trunc = M;
  G.metric = Metric::star;
  G.symbol.alpha2 = alpha2;
  G.symbol.nonlocal = true;
  G.gram.resize(2 * M + 1);
  for (int m = -M; m <= M; ++m) G.gram(m + M) = 1.0 - 1.0 / (alpha2 + double(m) * m);
  G.entries = G.gram.cast<Complex>().asDiagonal();
  return G;
}

OperatorMatrix conjugate_by_phase(const OperatorMatrix& A, double phase) {
  OperatorMatrix B = A;
  const int M = A.trunc;
  for (int i = -M; i <= M; ++i)
    for (int j = -M; j <= M; ++j)
      B.entries(i + M, j + M) = std::polar(1.0, (i - j) * phase) * A.entries(i + M, j + M);
  return B;
}

double metric_norm_sq(const OperatorMatrix& A, const Eigen::VectorXcd& u) {
  require(u.size() == A.size(), "metric_norm_sq: size mismatch");
  return (A.gram.array() * u.array().abs2()).sum();
}

double accretivity_residual(const OperatorMatrix& A, const Eigen::VectorXcd& u) {
  require(u.size() == A.size(), "accretivity_residual: size mismatch");
  const Eigen::VectorXcd Au = A.entries * u;
  const double lhs = (u.conjugate().array() * A.gram.cast<Complex>().array() * Au.array()).sum().real();
  double rhs = 0;
  for (int m = -A.trunc; m <= A.trunc; ++m)
    rhs += A.gram(A.index(m)) * double(m) * m * std::norm(u(A.index(m)));
  rhs *= A.symbol.diffusion;
  return std::abs(lhs - rhs) / (metric_norm_sq(A, u) + 1e-300);
}

}  // namespace helistab
