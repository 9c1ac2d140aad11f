#include "hdgmg/fsai.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hdgmg/error.hpp"

namespace hdgmg {

namespace {

// Lower triangle (with diagonal) of the pattern of A^power, each row sorted.
// With drop_tol > 0, entries beyond lower(A) are kept only where the scaled
// power (D^{-1/2}|A|D^{-1/2})^power is at least drop_tol.
std::vector<std::vector<int>> lower_pattern(const CsrMatrix& A, int power, double drop_tol) {
  const int n = static_cast<int>(A.rows());
  CsrMatrix S = A.cwiseAbs();
  Eigen::VectorXd d = A.diagonal().cwiseAbs().cwiseSqrt();
  for (int i = 0; i < n; ++i)
    if (d[i] == 0.0) d[i] = 1.0;
  S = d.cwiseInverse().asDiagonal() * S * d.cwiseInverse().asDiagonal();
  CsrMatrix P = S;
  for (int k = 1; k < power; ++k) P = CsrMatrix(P * S);

  std::vector<std::vector<int>> rows(n);
  for (int i = 0; i < n; ++i) {
    auto& out = rows[i];
    CsrMatrix::InnerIterator a(A, i);
    for (CsrMatrix::InnerIterator it(P, i); it && it.col() <= i; ++it) {
      while (a && a.col() < it.col()) ++a;
      const bool in_a = a && a.col() == it.col();
      if (it.col() == i || in_a || it.value() >= drop_tol) out.push_back(static_cast<int>(it.col()));
    }
    if (out.empty() || out.back() != i) out.push_back(i);
  }
  return rows;
}

}  // namespace

FsaiSmoother FsaiSmoother::build(const CsrMatrix& A, int pattern_power, double omega, double drop_tol,
                                 const std::vector<int>& order) {
  if (!order.empty()) {
    if (static_cast<Eigen::Index>(order.size()) != A.rows())
      fail(ErrorCode::dimension_mismatch, "FSAI ordering has the wrong length");
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm(A.rows());
    for (std::size_t k = 0; k < order.size(); ++k) perm.indices()[order[k]] = static_cast<int>(k);
    const CsrMatrix Ap = CsrMatrix(perm * A * perm.transpose());
    FsaiSmoother s = build(Ap, pattern_power, omega, drop_tol);
    s.G_ = CsrMatrix(s.G_ * perm);
    s.G_.makeCompressed();
    s.Gt_ = s.G_.transpose();
    s.Gt_.makeCompressed();
    return s;
  }
  if (A.rows() != A.cols()) fail(ErrorCode::dimension_mismatch, "FSAI needs a square matrix");
  if (pattern_power < 1) fail(ErrorCode::invalid_argument, "FSAI pattern power must be >= 1");
  const int n = static_cast<int>(A.rows());
  if (drop_tol < 0.0) fail(ErrorCode::invalid_argument, "FSAI drop tolerance must be >= 0");
  const auto pattern = lower_pattern(A, pattern_power, drop_tol);

  std::vector<std::vector<double>> values(n);
  std::vector<int> pos(n, -1);
  std::vector<std::string> errors;
#pragma omp parallel for schedule(dynamic, 16) firstprivate(pos)
  for (int i = 0; i < n; ++i) {
    const auto& J = pattern[i];
    const int m = static_cast<int>(J.size());
    for (int k = 0; k < m; ++k) pos[J[k]] = k;
    Eigen::MatrixXd sub = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k)
      for (CsrMatrix::InnerIterator it(A, J[k]); it; ++it) {
        const int c = pos[it.col()];
        if (c >= 0 && J[c] == it.col()) sub(k, c) = it.value();
      }
    for (int k = 0; k < m; ++k) pos[J[k]] = -1;
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e[m - 1] = 1.0;
    Eigen::VectorXd g = llt.solve(e);
    if (llt.info() != Eigen::Success || !(g[m - 1] > 0.0)) {
#pragma omp critical
      errors.push_back("FSAI: principal submatrix of row " + std::to_string(i) + " is not SPD");
      continue;
    }
    g /= std::sqrt(g[m - 1]);
    values[i].assign(g.data(), g.data() + m);
  }
  if (!errors.empty()) fail(ErrorCode::numerical_breakdown, errors.front());

  std::vector<Eigen::Triplet<double, int>> trip;
  std::size_t nnz = 0;
  for (const auto& r : pattern) nnz += r.size();
  trip.reserve(nnz);
  for (int i = 0; i < n; ++i)
    for (std::size_t k = 0; k < pattern[i].size(); ++k) trip.emplace_back(i, pattern[i][k], values[i][k]);

  FsaiSmoother s;
  s.G_.resize(n, n);
  s.G_.setFromTriplets(trip.begin(), trip.end());
  s.G_.makeCompressed();
  s.Gt_ = s.G_.transpose();
  s.Gt_.makeCompressed();
  s.omega_ = omega;
  s.power_ = pattern_power;
  s.complexity_ = A.nonZeros() > 0 ? (2.0 * static_cast<double>(s.G_.nonZeros()) - n) / A.nonZeros() : 0.0;
  return s;
}

void FsaiSmoother::apply_inverse(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  const Eigen::VectorXd t = G_ * r;
  z = Gt_ * t;
}

void FsaiSmoother::smooth(const TraceOperator& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, int steps) const {
  Eigen::VectorXd r(b.size()), z(b.size());
  for (int k = 0; k < steps; ++k) {
    A.apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
            std::span<double>(r.data(), static_cast<std::size_t>(r.size())));
    r = b - r;
    apply_inverse(r, z);
    x += omega_ * z;
  }
}

void FsaiSmoother::smooth(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& A, const Eigen::VectorXd& b,
                          Eigen::VectorXd& x, int steps) const {
  Eigen::VectorXd z(b.size());
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd r = b - A(x);
    apply_inverse(r, z);
    x += omega_ * z;
  }
}

double FsaiSmoother::estimate_lambda_max(const CsrMatrix& A, int iterations) const {
  const int n = static_cast<int>(A.rows());
  if (n == 0) return 0.0;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + i);
  v.normalize();
  double lam = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const Eigen::VectorXd w = G_ * (A * (Gt_ * v));
    lam = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
  }
  return lam;
}

}  // namespace hdgmg
