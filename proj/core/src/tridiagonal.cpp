#include "helistab/tridiagonal.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "helistab/error.hpp"

namespace helistab {

TridiagonalLU::TridiagonalLU(Eigen::VectorXcd sub, Eigen::VectorXcd diag, Eigen::VectorXcd sup)
    : dl_(std::move(sub)), d_(std::move(diag)), du_(std::move(sup)) {
  const Eigen::Index n = d_.size();
  require(n >= 1 && dl_.size() == n - 1 && du_.size() == n - 1, "TridiagonalLU: bad band sizes");
  du2_ = Eigen::VectorXcd::Zero(std::max<Eigen::Index>(n - 2, 0));
  swapped_.assign(std::max<Eigen::Index>(n - 1, 0), false);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d_(i)) >= std::abs(dl_(i))) {
      if (d_(i) == Complex{}) {
        singular_ = true;
        continue;
      }
      const Complex fact = dl_(i) / d_(i);
      dl_(i) = fact;
      d_(i + 1) -= fact * du_(i);
    } else {
      const Complex fact = d_(i) / dl_(i);
      d_(i) = dl_(i);
      dl_(i) = fact;
      const Complex temp = du_(i);
      du_(i) = d_(i + 1);
      d_(i + 1) = temp - fact * d_(i + 1);
      if (i + 2 < n) {
        du2_(i) = du_(i + 1);
        du_(i + 1) = -fact * du_(i + 1);
      }
      swapped_[i] = true;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (d_(i) == Complex{}) singular_ = true;
}

TridiagonalLU TridiagonalLU::from_dense(const Eigen::MatrixXcd& A) {
  const Eigen::Index n = A.rows();
  require(A.cols() == n, "TridiagonalLU: square matrix required");
  Eigen::VectorXcd sub(n - 1), diag(n), sup(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) diag(i) = A(i, i);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    sub(i) = A(i + 1, i);
    sup(i) = A(i, i + 1);
  }
  return TridiagonalLU(std::move(sub), std::move(diag), std::move(sup));
}

void TridiagonalLU::solve(Eigen::VectorXcd& b) const {
  const Eigen::Index n = d_.size();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (!swapped_[i]) {
      b(i + 1) -= dl_(i) * b(i);
    } else {
      const Complex temp = b(i);
      b(i) = b(i + 1);
      b(i + 1) = temp - dl_(i) * b(i);
    }
  }
  b(n - 1) /= d_(n - 1);
  if (n > 1) b(n - 2) = (b(n - 2) - du_(n - 2) * b(n - 1)) / d_(n - 2);
  for (Eigen::Index i = n - 3; i >= 0; --i)
    b(i) = (b(i) - du_(i) * b(i + 1) - du2_(i) * b(i + 2)) / d_(i);
}

void TridiagonalLU::solve_adjoint(Eigen::VectorXcd& b) const {
  const Eigen::Index n = d_.size();
  // U^H y = b
  b(0) /= std::conj(d_(0));
  if (n > 1) b(1) = (b(1) - std::conj(du_(0)) * b(0)) / std::conj(d_(1));
  for (Eigen::Index i = 2; i < n; ++i)
    b(i) = (b(i) - std::conj(du_(i - 1)) * b(i - 1) - std::conj(du2_(i - 2)) * b(i - 2)) /
           std::conj(d_(i));
  // L^H x = y, undoing the row interchanges in reverse
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    if (!swapped_[i]) {
      b(i) -= std::conj(dl_(i)) * b(i + 1);
    } else {
      const Complex temp = b(i + 1);
      b(i + 1) = b(i) - std::conj(dl_(i)) * temp;
      b(i) = temp;
    }
  }
}

double smallest_singular_tridiagonal(const Eigen::MatrixXcd& A, const LanczosOptions& opt) {
  const Eigen::Index n = A.rows();
  const TridiagonalLU lu = TridiagonalLU::from_dense(A);
  if (lu.singular()) return 0.0;

  const int kmax = static_cast<int>(std::min<Eigen::Index>(n, opt.max_iterations));
  Eigen::MatrixXcd Q(n, kmax + 1);
  std::vector<double> alpha, beta;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXcd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = Complex(gauss(rng), gauss(rng));
  q.normalize();
  Q.col(0) = q;

  double theta = 0;
  for (int j = 0; j < kmax; ++j) {
    Eigen::VectorXcd w = Q.col(j);
    lu.solve_adjoint(w);
    lu.solve(w);
    alpha.push_back(Q.col(j).dot(w).real());
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXcd h = Q.leftCols(j + 1).adjoint() * w;
      w -= Q.leftCols(j + 1) * h;
    }
    const double b = w.norm();

    const int k = j + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) T(i, i) = alpha[i];
    for (int i = 0; i + 1 < k; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    theta = es.eigenvalues()(k - 1);
    const double resid = std::abs(b * es.eigenvectors()(k - 1, k - 1));
    if (!std::isfinite(theta)) throw NumericalError("Lanczos: non-finite Ritz value");
    if (resid <= opt.tol * std::abs(theta) || k == n) break;
    if (b <= std::numeric_limits<double>::min()) break;
    beta.push_back(b);
    Q.col(j + 1) = w / b;
    if (j + 1 == kmax) throw NumericalError("Lanczos: no convergence for smallest singular value");
  }
  return theta > 0 ? 1.0 / std::sqrt(theta) : 0.0;
}

}  // namespace helistab
