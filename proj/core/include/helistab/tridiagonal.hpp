#pragma once

#include <Eigen/Dense>
#include <vector>

#include "helistab/grid.hpp"

namespace helistab {

// LU factorization with partial pivoting of a complex tridiagonal matrix
// (same scheme as LAPACK gttrf): one extra superdiagonal of fill.
class TridiagonalLU {
 public:
  TridiagonalLU(Eigen::VectorXcd sub, Eigen::VectorXcd diag, Eigen::VectorXcd sup);
  static TridiagonalLU from_dense(const Eigen::MatrixXcd& A);

  Eigen::Index size() const { return d_.size(); }
  bool singular() const { return singular_; }
  void solve(Eigen::VectorXcd& b) const;          // A x = b, in place
  void solve_adjoint(Eigen::VectorXcd& b) const;  // A^H x = b, in place

 private:
  Eigen::VectorXcd dl_, d_, du_, du2_;
  std::vector<bool> swapped_;
  bool singular_ = false;
};

struct LanczosOptions {
  int max_iterations = 300;
  double tol = 1e-13;
  unsigned seed = 12345;
};

// Smallest singular value of a tridiagonal matrix via Lanczos on (A^H A)^{-1}
// with full reorthogonalization.
double smallest_singular_tridiagonal(const Eigen::MatrixXcd& A, const LanczosOptions& opt = {});

}  // namespace helistab
