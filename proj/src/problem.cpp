#include "hdgmg/problem.hpp"

#include <cmath>

namespace hdgmg {

namespace manufactured {

namespace {
// a(t) = t(t-1) exp(-t^2) and its first two derivatives.
double a0(double t) { return t * (t - 1.0) * std::exp(-t * t); }
double a1(double t) { return std::exp(-t * t) * (-2.0 * t * t * t + 2.0 * t * t + 2.0 * t - 1.0); }
double a2(double t) {
  return std::exp(-t * t) * (4.0 * t * t * t * t - 4.0 * t * t * t - 10.0 * t * t + 6.0 * t + 2.0);
}
}  // namespace

double u(double x, double y) { return a0(x) * a0(y); }

std::array<double, 2> grad_u(double x, double y) { return {a1(x) * a0(y), a0(x) * a1(y)}; }

double laplacian_u(double x, double y) { return a2(x) * a0(y) + a0(x) * a2(y); }

double coefficient(double x, double y) { return std::tanh(x + y) + 1.0; }

double source(double x, double y) {
  const double th = std::tanh(x + y);
  const double dk = 1.0 - th * th;  // dK/dx = dK/dy
  const auto g = grad_u(x, y);
  return -(dk * (g[0] + g[1]) + (th + 1.0) * laplacian_u(x, y));
}

}  // namespace manufactured

ProblemSpec manufactured_problem(double tau) {
  ProblemSpec s;
  s.coefficient = manufactured::coefficient;
  s.source = manufactured::source;
  s.dirichlet = manufactured::u;
  s.exact_u = manufactured::u;
  s.exact_q = [](double x, double y) -> std::array<double, 2> {
    const double k = manufactured::coefficient(x, y);
    auto g = manufactured::grad_u(x, y);
    return {-k * g[0], -k * g[1]};
  };
  s.tau = tau;
  return s;
}

ProblemSpec polynomial_problem(ScalarField u, VectorField grad_u, ScalarField minus_laplacian, double tau) {
  ProblemSpec s;
  s.coefficient = [](double, double) { return 1.0; };
  s.source = std::move(minus_laplacian);
  s.dirichlet = u;
  s.exact_u = std::move(u);
  s.exact_q = [g = std::move(grad_u)](double x, double y) -> std::array<double, 2> {
    auto v = g(x, y);
    return {-v[0], -v[1]};
  };
  s.tau = tau;
  return s;
}

}  // namespace hdgmg
