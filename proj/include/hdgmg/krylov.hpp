#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace hdgmg {

using LinearMap = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct KrylovResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  ///< ||r_k||_2, k = 0..iterations
};

/// Conjugate gradients for an SPD operator; `precond` may be empty.
/// Stops when ||r|| <= rel_tol ||b||.
KrylovResult conjugate_gradient(const LinearMap& op, const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                                double rel_tol, int max_iter, const LinearMap& precond = {});

}  // namespace hdgmg
