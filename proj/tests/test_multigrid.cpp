#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "hdgmg/error.hpp"
#include "hdgmg/multigrid.hpp"
#include "oracles.hpp"

using namespace hdgmg;

namespace {

std::shared_ptr<const Mesh> square(int n) { return std::make_shared<const Mesh>(build_cartesian(n, n)); }

double vcycle_rate(int n, int p, CycleType type = CycleType::v, MultigridOptions opts = {}) {
  Hierarchy h(square(n), p, manufactured_problem(1.0), opts);
  ConvergenceMonitor mon;
  const auto& b = h.fine().rhs();
  h.solve(type, b, Eigen::VectorXd::Zero(b.size()), 1e-12, 50, mon);
  return mon.asymptotic_rate();
}

}  // namespace

TEST_CASE("multigrid: convergence monitor") {
  ConvergenceMonitor m;
  for (int k = 0; k <= 8; ++k) m.record(std::pow(0.1, k));
  CHECK(m.iterations() == 8);
  CHECK(m.ratio(3) == doctest::Approx(0.1));
  CHECK(m.asymptotic_rate() == doctest::Approx(0.1));
  CHECK(!m.diverged());
  CHECK(m.relative_residual() == doctest::Approx(1e-8));
  CHECK_THROWS_AS(m.ratio(0), Error);
  CHECK_THROWS_AS(m.ratio(9), Error);
  ConvergenceMonitor d;
  for (int k = 0; k <= 6; ++k) d.record(std::pow(1.5, k));
  CHECK(d.diverged());
}

TEST_CASE("multigrid: level structure") {
  MultigridOptions opts;
  Hierarchy h(square(16), 4, manufactured_problem(1.0), opts);
  REQUIRE(h.num_levels() == 7);
  const int orders[] = {4, 3, 2, 1, 1, 1, 1};
  const int meshes[] = {16, 16, 16, 16, 8, 4, 2};
  for (int l = 0; l < 7; ++l) {
    CHECK(h.level(l).order() == orders[l]);
    CHECK(h.level(l).mesh().nx() == meshes[l]);
    if (l) CHECK(h.level(l).size() < h.level(l - 1).size());
  }
  CHECK(h.level(0).kind == MGLevel::Kind::p_level);
  CHECK(h.level(3).kind == MGLevel::Kind::h_level);
  CHECK(h.level(6).kind == MGLevel::Kind::coarsest);
  CHECK(h.level(6).size() == 1);
  for (int l = 4; l < 7; ++l) CHECK(h.level(l).continuous);
  CHECK(!h.level(3).continuous);
  MultigridOptions tr;
  tr.h_space = HCoarseSpace::trace;
  Hierarchy ht(square(16), 4, manufactured_problem(1.0), tr);
  CHECK(ht.num_levels() == 7);
  CHECK(ht.level(6).size() == 4 * 2);

  Hierarchy h8(square(16), 8, manufactured_problem(1.0), opts);
  CHECK(h8.num_levels() == 11);
  Hierarchy odd(square(6), 2, manufactured_problem(1.0), opts);
  CHECK(odd.num_levels() == 3);  // 6 -> 3 then no further halving
  CHECK(odd.level(2).mesh().nx() == 3);
}

TEST_CASE("multigrid: single-level hierarchy is the direct solve") {
  Hierarchy h(square(2), 1, manufactured_problem(1.0));
  REQUIRE(h.num_levels() == 1);
  ConvergenceMonitor mon;
  const auto& b = h.fine().rhs();
  const Eigen::VectorXd x = h.solve(CycleType::v, b, Eigen::VectorXd::Zero(b.size()), 1e-12, 5, mon);
  CHECK(mon.iterations() == 1);
  CHECK(oracle::rel_diff(x, h.fine().solve_direct()) < 1e-13);
}

TEST_CASE("multigrid: configuration errors") {
  MultigridOptions opts;
  opts.coarse_cap = 3;
  CHECK_THROWS_AS(Hierarchy(square(6), 2, manufactured_problem(1.0), opts), Error);
  CHECK_THROWS_AS(Hierarchy(square(4), 0, manufactured_problem(1.0)), Error);
  MultigridOptions neg;
  neg.nu1 = -1;
  CHECK_THROWS_AS(Hierarchy(square(4), 2, manufactured_problem(1.0), neg), Error);
  Hierarchy h(square(4), 2, manufactured_problem(1.0));
  CHECK_THROWS_AS(h.prolongate(h.num_levels() - 1, Eigen::VectorXd::Zero(1)), Error);
  CHECK_THROWS_AS(h.restrict_to_coarse(-1, Eigen::VectorXd::Zero(1)), Error);
  ConvergenceMonitor mon;
  CHECK_THROWS_AS(h.solve(CycleType::fmg, h.fine().rhs(), h.fine().rhs(), 1e-8, 3, mon), Error);
}

TEST_CASE("multigrid: p-transfers embed lower-order traces exactly") {
  Hierarchy h(square(4), 4, manufactured_problem(1.0));
  auto g = [](double x, double y) { return 1.0 + x - 2.0 * y + x * y + x * x * x; };
  for (int l = 0; l < 3; ++l) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(h.level(l + 1).size());
    CHECK((h.prolongate(l, ones).array() - 1.0).abs().maxCoeff() < 1e-13);
    const Eigen::VectorXd gc = h.level(l + 1).disc->project_trace(g);
    const Eigen::VectorXd gf = h.level(l).disc->project_trace(g);
    if (h.level(l + 1).order() >= 3) CHECK(oracle::rel_diff(h.prolongate(l, gc), gf) < 1e-12);
  }
  const TraceLayout& lay = h.level(0).disc->layout();
  const CsrMatrix I = p_prolongation(lay, lay, 4, 4);
  CHECK((Eigen::MatrixXd(I) - Eigen::MatrixXd::Identity(lay.size(), lay.size())).norm() < 1e-13);
}

TEST_CASE("multigrid: restriction is the adjoint of prolongation") {
  Hierarchy h(square(8), 3, manufactured_problem(1.0));
  std::mt19937_64 rng(17);
  for (int l = 0; l + 1 < h.num_levels(); ++l) {
    const Eigen::VectorXd xc = oracle::random_vector(h.level(l + 1).size(), rng);
    const Eigen::VectorXd yf = oracle::random_vector(h.level(l).size(), rng);
    const double a = h.prolongate(l, xc).dot(yf), b = xc.dot(h.restrict_to_coarse(l, yf));
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("multigrid: h-transfer keeps constants away from the boundary") {
  for (auto ext : {InteriorExtension::harmonic, InteriorExtension::local_solver}) {
    MultigridOptions opts;
    opts.interior_extension = ext;
    opts.h_space = HCoarseSpace::trace;
    Hierarchy h(square(16), 1, manufactured_problem(1.0), opts);
    const Eigen::VectorXd y = h.prolongate(0, Eigen::VectorXd::Ones(h.level(1).size()));
    const Mesh& fm = h.level(0).mesh();
    const TraceLayout& lay = h.level(0).disc->layout();
    const double hc = 1.0 / 8.0;
    int checked = 0;
    for (int b = 0; b < lay.num_blocks(); ++b) {
      const Facet& f = fm.facet(lay.facet_of_block[b]);
      const double mx = 0.5 * (f.xa + f.xb) / hc, my = 0.5 * (f.ya + f.yb) / hc;
      const bool on_coarse = f.axis == Axis::horizontal ? std::abs(my - std::round(my)) < 1e-9
                                                        : std::abs(mx - std::round(mx)) < 1e-9;
      const int ix = static_cast<int>(std::floor(mx)), iy = static_cast<int>(std::floor(my));
      if (!on_coarse && (ix < 1 || ix > 6 || iy < 1 || iy > 6)) continue;
      CHECK((y.segment(b * lay.n1d, lay.n1d).array() - 1.0).abs().maxCoeff() < 1e-12);
      ++checked;
    }
    CHECK(checked > lay.num_blocks() / 2);
  }
}

TEST_CASE("multigrid: continuous h-levels reproduce linear functions") {
  auto g = [](double x, double y) { return 0.3 + x - 2.0 * y; };
  for (int p : {1, 3}) {
    Hierarchy h(square(16), p, manufactured_problem(1.0));
    const int l = p - 1;  // fine-mesh p=1 trace level -> 8x8 vertices
    const Mesh& cm = h.level(l + 1).mesh();
    Eigen::VectorXd gc(h.level(l + 1).size());
    for (int j = 1; j < cm.ny(); ++j)
      for (int i = 1; i < cm.nx(); ++i) gc[(i - 1) + (j - 1) * (cm.nx() - 1)] = g(i / 8.0, j / 8.0);
    const Eigen::VectorXd y = h.prolongate(l, gc);
    const Mesh& fm = h.level(l).mesh();
    const TraceLayout& lay = h.level(l).disc->layout();
    int checked = 0;
    for (int b = 0; b < lay.num_blocks(); ++b) {
      const Facet& f = fm.facet(lay.facet_of_block[b]);
      const double lo = 1.0 / 8.0 - 1e-12, hi = 7.0 / 8.0 + 1e-12;
      if (std::min({f.xa, f.xb, f.ya, f.yb}) < lo || std::max({f.xa, f.xb, f.ya, f.yb}) > hi) continue;
      CHECK(std::abs(y[b * lay.n1d] - g(f.xa, f.ya)) < 1e-13);
      CHECK(std::abs(y[b * lay.n1d + 1] - g(f.xb, f.yb)) < 1e-13);
      ++checked;
    }
    CHECK(checked > lay.num_blocks() / 2);
    // vertex to vertex: 8x8 -> 4x4
    const Mesh& c2 = h.level(l + 2).mesh();
    Eigen::VectorXd g2(h.level(l + 2).size());
    for (int j = 1; j < c2.ny(); ++j)
      for (int i = 1; i < c2.nx(); ++i) g2[(i - 1) + (j - 1) * (c2.nx() - 1)] = g(i / 4.0, j / 4.0);
    const Eigen::VectorXd y2 = h.prolongate(l + 1, g2);
    for (int j = 2; j <= 6; ++j)
      for (int i = 2; i <= 6; ++i) CHECK(std::abs(y2[(i - 1) + (j - 1) * 7] - g(i / 8.0, j / 8.0)) < 1e-13);
  }
}

TEST_CASE("multigrid: omega bound caps the smoother spectrum") {
  Hierarchy h(square(8), 2, manufactured_problem(1.0));
  MultigridOptions off;
  off.omega_bound = 0.0;
  Hierarchy h0(square(8), 2, manufactured_problem(1.0), off);
  for (int l = 0; l + 1 < h.num_levels(); ++l) {
    const auto& s = *h.level(l).smoother;
    const Eigen::MatrixXd G(s.factor());
    const Eigen::MatrixXd A(h.level(l).matrix);
    const double lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G * A * G.transpose()).eigenvalues().maxCoeff();
    CHECK(s.omega() * lam <= 1.8 * (1.0 + 1e-6));
    CHECK(s.omega() <= 1.0);
    CHECK(h0.level(l).smoother->omega() == 1.0);
  }
}

TEST_CASE("multigrid: zero right-hand side stays zero") {
  Hierarchy h(square(4), 3, manufactured_problem(1.0));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(h.fine().size());
  h.cycle(0, Eigen::VectorXd::Zero(h.fine().size()), x, 1);
  CHECK(x.norm() == 0.0);
}

TEST_CASE("multigrid: residuals decrease monotonically") {
  Hierarchy h(square(4), 2, manufactured_problem(1.0));
  for (int l = 0; l + 1 < h.num_levels(); ++l) {
    const auto& s = *h.level(l).smoother;
    const Eigen::MatrixXd G(s.factor());
    const Eigen::MatrixXd A(h.level(l).matrix);
    const Eigen::MatrixXd Mit = Eigen::MatrixXd::Identity(A.rows(), A.cols()) - s.omega() * G.transpose() * G * A;
    CHECK(Eigen::EigenSolver<Eigen::MatrixXd>(Mit).eigenvalues().cwiseAbs().maxCoeff() < 1.0);
  }
  ConvergenceMonitor mon;
  const auto& b = h.fine().rhs();
  const Eigen::VectorXd x = h.solve(CycleType::v, b, Eigen::VectorXd::Zero(b.size()), 1e-12, 50, mon);
  const auto& r = mon.history();
  for (std::size_t k = 1; k < r.size(); ++k) CHECK(r[k] < r[k - 1]);
  CHECK(r.back() <= 1e-12 * b.norm());
  CHECK(oracle::rel_diff(x, h.fine().solve_direct()) < 1e-9);
}

TEST_CASE("multigrid: W-cycle no slower than V-cycle") {
  const double v = vcycle_rate(8, 3, CycleType::v), w = vcycle_rate(8, 3, CycleType::w);
  CHECK(w <= v + 0.02);
}

TEST_CASE("multigrid: rate independent of the mesh size") {
  const double r8 = vcycle_rate(8, 4), r16 = vcycle_rate(16, 4);
  CHECK(std::abs(r8 - r16) <= 0.05);
  CHECK(r16 < 0.25);
}

TEST_CASE("multigrid: aggressive smoother is faster") {
  MultigridOptions agg;
  agg.fsai_power = 2;
  const double base = vcycle_rate(8, 3), fast = vcycle_rate(8, 3, CycleType::v, agg);
  CHECK(fast < base);
  CHECK(fast <= 0.05);
}

TEST_CASE("multigrid: full multigrid close to discretisation error") {
  MultigridOptions agg;
  agg.fsai_power = 2;
  Hierarchy h(square(8), 3, manufactured_problem(1.0), agg);
  const FmgReport r = h.fmg();
  CHECK(r.fmg_error.u <= 2.0 * r.direct_error.u);
  CHECK(r.relative_residual < 1e-2);
  CHECK(oracle::rel_diff(h.level_rhs(1), h.restrict_to_coarse(0, h.fine().rhs())) < 1e-15);
}

TEST_CASE("multigrid: rediscretised coarse levels are available") {
  MultigridOptions opts;
  opts.coarse_operator = CoarseOperator::rediscretized;
  Hierarchy h(square(4), 2, manufactured_problem(1.0), opts);
  CHECK(oracle::rel_diff(Eigen::VectorXd(h.level(1).matrix * Eigen::VectorXd::Ones(h.level(1).size())),
                         h.level(1).disc->op().apply(Eigen::VectorXd::Ones(h.level(1).size()))) < 1e-13);
  CHECK(oracle::rel_diff(h.level_rhs(2), h.level(2).disc->rhs()) == 0.0);
  const FmgReport r = h.fmg();
  CHECK(std::isfinite(r.fmg_error.u));
}
