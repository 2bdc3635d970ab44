#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <memory>

#include "parlab/errors.hpp"

namespace parlab {

/// Direct tridiagonal solve for 1D systems, preconditioned BiCGSTAB (ILUT)
/// for 2D, relative tolerance 1e-13 and at most 1e4 iterations. Construction
/// factors once so repeated solves against the same matrix are cheap.
class LinearSolver {
 public:
  LinearSolver(Eigen::SparseMatrix<double> M, int dim) : M_(std::move(M)) {
    if (dim == 1 && is_tridiagonal(M_)) {
      factor_tridiagonal();
      tridiag_ = true;
    } else {
      iter_ = std::make_unique<Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                                               Eigen::IncompleteLUT<double>>>();
      iter_->setTolerance(1e-13);
      iter_->setMaxIterations(10000);
      iter_->compute(M_);
      if (iter_->info() != Eigen::Success)
        throw Error(errc::solve_failed, "preconditioner setup failed");
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x;
    if (tridiag_) {
      x = solve_tridiagonal(rhs);
    } else {
      x = iter_->solve(rhs);
      if (iter_->info() != Eigen::Success)
        throw Error(errc::solve_failed, "iterative solve did not converge");
    }
    // linear solve contract: relative residual <= 1e-12
    double rhs_scale = rhs.lpNorm<Eigen::Infinity>();
    double resid = (M_ * x - rhs).lpNorm<Eigen::Infinity>();
    if (!(resid <= 1e-12 * std::max(rhs_scale, 1e-300)) && rhs_scale > 0.0)
      throw Error(errc::solve_failed, "residual " + std::to_string(resid) +
                                          " exceeds 1e-12 relative tolerance");
    return x;
  }

  const Eigen::SparseMatrix<double>& matrix() const { return M_; }

 private:
  static bool is_tridiagonal(const Eigen::SparseMatrix<double>& M) {
    for (int k = 0; k < M.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
        if (std::abs(it.row() - it.col()) > 1) return false;
    return true;
  }

  void factor_tridiagonal() {
    const int n = static_cast<int>(M_.rows());
    lower_.assign(n, 0.0);
    diag_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    for (int k = 0; k < M_.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(M_, k); it; ++it) {
        int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
        if (r == c)
          diag_[r] = it.value();
        else if (c == r - 1)
          lower_[r] = it.value();
        else
          upper_[r] = it.value();
      }
    }
    // Thomas forward sweep, precomputed
    cprime_.assign(n, 0.0);
    denom_.assign(n, 0.0);
    double den = diag_[0];
    if (den == 0.0) throw Error(errc::solve_failed, "zero pivot in tridiagonal factorization");
    denom_[0] = den;
    cprime_[0] = upper_[0] / den;
    for (int i = 1; i < n; ++i) {
      den = diag_[i] - lower_[i] * cprime_[i - 1];
      if (den == 0.0) throw Error(errc::solve_failed, "zero pivot in tridiagonal factorization");
      denom_[i] = den;
      cprime_[i] = upper_[i] / den;
    }
  }

  Eigen::VectorXd solve_tridiagonal(const Eigen::VectorXd& rhs) const {
    const int n = static_cast<int>(rhs.size());
    Eigen::VectorXd d(n), x(n);
    d[0] = rhs[0] / denom_[0];
    for (int i = 1; i < n; ++i) d[i] = (rhs[i] - lower_[i] * d[i - 1]) / denom_[i];
    x[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = d[i] - cprime_[i] * x[i + 1];
    return x;
  }

  Eigen::SparseMatrix<double> M_;
  bool tridiag_ = false;
  std::vector<double> lower_, diag_, upper_, cprime_, denom_;
  std::unique_ptr<Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>>> iter_;
};

}  // namespace parlab
