#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hdgmg/trace_operator.hpp"

namespace hdgmg {

/// Factorised sparse approximate inverse G^T G ~ A^{-1}, with G lower
/// triangular on the pattern of lower(A^power).
///
/// Row i of G solves A[J_i, J_i] g = e_i over its pattern J_i and is scaled so
/// that (G A G^T)_ii = 1. This minimises ||I - G L||_F row by row for the
/// Cholesky factor L of A.
class FsaiSmoother {
 public:
  FsaiSmoother() = default;
  /// drop_tol filters the entries that lower(A^power) adds to lower(A); 0 keeps them all.
  /// `order` (new position -> original index) renumbers the unknowns before
  /// the lower-triangular factor is formed; empty keeps the natural order.
  static FsaiSmoother build(const CsrMatrix& A, int pattern_power = 1, double omega = 1.0, double drop_tol = 0.0,
                            const std::vector<int>& order = {});

  /// z = G^T G r
  void apply_inverse(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;

  /// `steps` Richardson sweeps x <- x + omega G^T G (b - A x).
  void smooth(const TraceOperator& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, int steps) const;
  void smooth(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& A, const Eigen::VectorXd& b,
              Eigen::VectorXd& x, int steps) const;

  /// Storage of M = G^T G kept as its two factors, relative to A:
  /// (nnz(G) + nnz(G^T) - n) / nnz(A). Exactly 1 for the lower(A) pattern.
  double operator_complexity() const { return complexity_; }
  const CsrMatrix& factor() const { return G_; }
  double omega() const { return omega_; }
  void set_omega(double omega) { omega_ = omega; }
  /// Largest eigenvalue of G^T G A (power iteration on G A G^T, fixed start vector).
  double estimate_lambda_max(const CsrMatrix& A, int iterations = 40) const;
  int pattern_power() const { return power_; }

 private:
  CsrMatrix G_;
  CsrMatrix Gt_;
  double omega_ = 1.0;
  double complexity_ = 0.0;
  int power_ = 1;
};

}  // namespace hdgmg
