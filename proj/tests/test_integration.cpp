#include <doctest.h>

#include <cmath>
#include <memory>

#include "hdgmg/krylov.hpp"
#include "hdgmg/multigrid.hpp"
#include "oracles.hpp"

using namespace hdgmg;

namespace {

ErrorNorms solve(int n, int p, double tau = 1.0) {
  Discretization d(std::make_shared<const Mesh>(build_cartesian(n, n)), p, manufactured_problem(tau));
  return d.errors(d.solve_direct(), true);
}

}  // namespace

TEST_CASE("integration: convergence orders at low order") {
  for (int p = 1; p <= 2; ++p) {
    const ErrorNorms a = solve(16, p), b = solve(32, p);
    CHECK(std::log2(a.u / b.u) > p + 0.8);
    CHECK(std::log2(a.q / b.q) > p + 0.8);
    CHECK(std::log2(a.u_star / b.u_star) > p + 1.8);
  }
}

TEST_CASE("integration: reference magnitudes") {
  const ErrorNorms e = solve(8, 4);
  CHECK(e.u / 1.65e-8 < 3.0);
  CHECK(e.u / 1.65e-8 > 1.0 / 3.0);
  const ErrorNorms f = solve(32, 3);
  CHECK(f.u / 2.33e-9 < 3.0);
  CHECK(f.u_star / 8.80e-12 < 3.0);
  CHECK(f.u_star / 8.80e-12 > 1.0 / 3.0);
}

TEST_CASE("integration: larger tau keeps the orders of u and u*") {
  const ErrorNorms a = solve(8, 2, 10.0), b = solve(16, 2, 10.0);
  CHECK(std::log2(a.u / b.u) > 2.8);
  CHECK(std::log2(a.u_star / b.u_star) > 3.5);
}

TEST_CASE("integration: CG, multigrid and the direct solver agree") {
  auto mesh = std::make_shared<const Mesh>(build_cartesian(8, 8));
  MultigridOptions opts;
  Hierarchy h(mesh, 3, manufactured_problem(1.0), opts);
  const Discretization& d = h.fine();
  const Eigen::VectorXd xd = d.solve_direct();
  ConvergenceMonitor mon;
  const Eigen::VectorXd xm = h.solve(CycleType::v, d.rhs(), Eigen::VectorXd::Zero(d.size()), 1e-12, 50, mon);
  const LinearMap op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = d.op().apply(x); };
  const auto cg = conjugate_gradient(op, d.rhs(), Eigen::VectorXd::Zero(d.size()), 1e-12, 5000);
  const LinearMap pc = [&](const Eigen::VectorXd& r, Eigen::VectorXd& z) {
    z = Eigen::VectorXd::Zero(r.size());
    h.cycle(0, r, z, 1);
  };
  const auto pcg = conjugate_gradient(op, d.rhs(), Eigen::VectorXd::Zero(d.size()), 1e-12, 100, pc);
  CHECK(cg.converged);
  CHECK(pcg.converged);
  CHECK(pcg.iterations < 15);
  CHECK(pcg.iterations < cg.iterations);
  CHECK(oracle::rel_diff(xm, xd) < 1e-9);
  CHECK(oracle::rel_diff(cg.x, xd) < 1e-9);
  CHECK(oracle::rel_diff(pcg.x, xd) < 1e-9);
  CHECK(d.errors(xm, false).u == doctest::Approx(d.errors(xd, false).u).epsilon(1e-6));
}

TEST_CASE("integration: rectangular mesh and domain") {
  auto mesh = std::make_shared<const Mesh>(build_cartesian(8, 4, Rectangle{0.0, 1.0, 0.0, 0.5}));
  const ProblemSpec s = polynomial_problem([](double x, double y) { return x * x * y + y * y * y; },
                                           [](double x, double y) {
                                             return std::array<double, 2>{2 * x * y, x * x + 3 * y * y};
                                           },
                                           [](double, double y) { return -8.0 * y; });
  Hierarchy h(mesh, 3, s);
  CHECK(h.level(h.num_levels() - 1).mesh().nx() == 2);
  ConvergenceMonitor mon;
  const auto& b = h.fine().rhs();
  const Eigen::VectorXd x = h.solve(CycleType::v, b, Eigen::VectorXd::Zero(b.size()), 1e-12, 50, mon);
  CHECK(mon.relative_residual() <= 1e-12);
  CHECK(h.fine().errors(x, true).u < 1e-10);
}
