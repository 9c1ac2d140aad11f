#include "hdgmg/krylov.hpp"

namespace hdgmg {

KrylovResult conjugate_gradient(const LinearMap& op, const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                                double rel_tol, int max_iter, const LinearMap& precond) {
  KrylovResult res;
  res.x = x0;
  Eigen::VectorXd Ax(b.size());
  op(res.x, Ax);
  Eigen::VectorXd r = b - Ax;
  Eigen::VectorXd z(b.size());
  if (precond) precond(r, z); else z = r;
  Eigen::VectorXd d = z;
  double rz = r.dot(z);
  const double bnorm = b.norm();
  res.residuals.push_back(r.norm());
  if (bnorm == 0.0 || res.residuals.back() <= rel_tol * bnorm) {
    res.converged = true;
    return res;
  }
  Eigen::VectorXd Ad(b.size());
  for (int k = 0; k < max_iter; ++k) {
    op(d, Ad);
    const double alpha = rz / d.dot(Ad);
    res.x += alpha * d;
    r -= alpha * Ad;
    res.iterations = k + 1;
    res.residuals.push_back(r.norm());
    if (res.residuals.back() <= rel_tol * bnorm) {
      res.converged = true;
      break;
    }
    if (precond) precond(r, z); else z = r;
    const double rz_new = r.dot(z);
    d = z + (rz_new / rz) * d;
    rz = rz_new;
  }
  return res;
}

}  // namespace hdgmg
