#pragma once

#include <array>
#include <functional>
#include <vector>

namespace hdgmg {

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<std::array<double, 2>(double, double)>;

/// -div(K grad u) = f in the domain, u = g_D on the boundary, with scalar K > 0.
struct ProblemSpec {
  ScalarField coefficient;  ///< K(x, y)
  ScalarField source;       ///< f(x, y)
  ScalarField dirichlet;    ///< g_D(x, y)
  double tau = 1.0;         ///< stabilisation on every facet unless overridden
  std::vector<double> facet_tau;  ///< optional per-facet override, indexed by mesh facet id

  /// Known solution, when available, for error measurement.
  ScalarField exact_u;
  VectorField exact_q;  ///< q = -K grad u

  double tau_on(int facet) const {
    return facet_tau.empty() ? tau : facet_tau[static_cast<std::size_t>(facet)];
  }
  bool has_exact() const { return static_cast<bool>(exact_u); }
};

/// u = x(x-1) y(y-1) exp(-x^2-y^2), K = tanh(x+y) + 1 on the unit square.
ProblemSpec manufactured_problem(double tau = 1.0);

/// Building blocks of the manufactured problem, exposed for verification.
namespace manufactured {
double u(double x, double y);
std::array<double, 2> grad_u(double x, double y);
double laplacian_u(double x, double y);
double coefficient(double x, double y);
double source(double x, double y);
}  // namespace manufactured

/// Constant K, zero source and the given data; u = g_D exactly when g_D is harmonic-compatible.
ProblemSpec polynomial_problem(ScalarField u, VectorField grad_u, ScalarField minus_laplacian, double tau = 1.0);

}  // namespace hdgmg
