#include "hdgmg/hdg_local.hpp"

#include <cmath>
#include <string>

#include "hdgmg/error.hpp"

namespace hdgmg {

namespace {

// Volume index of the k-th node along side s (nodes on a side are the only
// basis functions that do not vanish there).
int side_node(int side, int k, int n) {
  const int p = n - 1;
  switch (side) {
    case bottom: return k;
    case right: return p + k * n;
    case top: return k + p * n;
    default: return k * n;  // left
  }
}

// Physical point at facet parameter t in [-1,1].
std::array<double, 2> side_point(const Element& el, int side, double t) {
  const double sx = el.x0 + 0.5 * el.dx() * (t + 1.0);
  const double sy = el.y0 + 0.5 * el.dy() * (t + 1.0);
  switch (side) {
    case bottom: return {sx, el.y0};
    case right: return {el.x1, sy};
    case top: return {sx, el.y1};
    default: return {el.x0, sy};
  }
}

double side_length(const Element& el, int side) {
  return (side == bottom || side == top) ? el.dx() : el.dy();
}

}  // namespace

LocalSolver::LocalSolver(int element, int order, LocalBlocks blocks)
    : element_(element), order_(order), blocks_(std::move(blocks)) {
  const int nq = 2 * n1d() * n1d();
  const int nu = n1d() * n1d();
  local_.resize(nq + nu, nq + nu);
  local_ << blocks_.A, -blocks_.B.transpose(), blocks_.B, blocks_.D;
  lu_.compute(local_);
  const double rc = lu_.rcond();
  if (!std::isfinite(rc) || rc < 1e-15)
    fail(ErrorCode::numerical_breakdown,
         "local HDG matrix is singular on element " + std::to_string(element) + " (rcond " +
             std::to_string(rc) + ")");
}

Eigen::MatrixXd LocalSolver::coupling() const {
  Eigen::MatrixXd ce(volume_size(), trace_size());
  ce << blocks_.C, blocks_.E;
  return ce;
}

Eigen::VectorXd LocalSolver::load() const {
  Eigen::VectorXd rf(volume_size());
  rf << blocks_.R, blocks_.F;
  return rf;
}

LocalSolver assemble_local(const Mesh& mesh, int element, const ProblemSpec& spec,
                           const ReferenceElement2D& ref) {
  if (element < 0 || static_cast<std::size_t>(element) >= mesh.num_elements())
    fail(ErrorCode::invalid_argument, "element id out of range");
  const Element& el = mesh.element(element);
  const int n = ref.n1d();
  const int nn = n * n;
  const int nq = ref.nq();
  const Eigen::MatrixXd& V = ref.interp;
  const Eigen::MatrixXd& Vd = ref.deriv;
  const auto& wq = ref.quad.quad_weights;
  const double jac = 0.25 * el.dx() * el.dy();
  const double sx = 2.0 / el.dx(), sy = 2.0 / el.dy();

  LocalBlocks blk;
  Eigen::MatrixXd mass_kinv = Eigen::MatrixXd::Zero(nn, nn);
  blk.B = Eigen::MatrixXd::Zero(nn, 2 * nn);
  blk.source_load = Eigen::VectorXd::Zero(nn);

  Eigen::VectorXd phi(nn), dphix(nn), dphiy(nn);
  for (int b = 0; b < nq; ++b)
    for (int a = 0; a < nq; ++a) {
      const double x = el.x0 + 0.5 * el.dx() * (ref.quad.nodes[a] + 1.0);
      const double y = el.y0 + 0.5 * el.dy() * (ref.quad.nodes[b] + 1.0);
      const double w = wq[a] * wq[b] * jac;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const int I = i + j * n;
          phi[I] = V(a, i) * V(b, j);
          dphix[I] = sx * Vd(a, i) * V(b, j);
          dphiy[I] = sy * V(a, i) * Vd(b, j);
        }
      const double kval = spec.coefficient(x, y);
      if (!(kval > 0.0)) fail(ErrorCode::invalid_argument, "coefficient K must be positive");
      mass_kinv.noalias() += (w / kval) * phi * phi.transpose();
      blk.B.leftCols(nn).noalias() += w * phi * dphix.transpose();
      blk.B.rightCols(nn).noalias() += w * phi * dphiy.transpose();
      if (spec.source) blk.source_load += (w * spec.source(x, y)) * phi;
    }

  blk.A = Eigen::MatrixXd::Zero(2 * nn, 2 * nn);
  blk.A.topLeftCorner(nn, nn) = mass_kinv;
  blk.A.bottomRightCorner(nn, nn) = mass_kinv;

  // 1D reference trace mass: Mref(m,k) = sum_t w_t l_m(t) l_k(t).
  const Eigen::MatrixXd mref = V.transpose() * Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(wq.data(), nq)).asDiagonal() * V;

  blk.C = Eigen::MatrixXd::Zero(2 * nn, 4 * n);
  blk.D = Eigen::MatrixXd::Zero(nn, nn);
  blk.E = Eigen::MatrixXd::Zero(nn, 4 * n);
  blk.boundary_trace = Eigen::VectorXd::Zero(4 * n);
  const auto& facets = mesh.element_facets(element);
  for (int s = 0; s < kSidesPerElement; ++s) {
    const int fid = facets[s];
    const double tau = spec.tau_on(fid);
    if (!(tau > 0.0)) fail(ErrorCode::invalid_argument, "stabilisation tau must be positive");
    blk.tau[s] = tau;
    blk.dirichlet[s] = mesh.facet(fid).boundary;
    const double half = 0.5 * side_length(el, s);
    blk.facet_mass[s] = half * mref;
    const auto nrm = outward_normal(s);
    for (int k = 0; k < n; ++k) {
      const int I = side_node(s, k, n);
      for (int m = 0; m < n; ++m) {
        const double mk = blk.facet_mass[s](k, m);
        blk.C(I, s * n + m) += nrm[0] * mk;
        blk.C(nn + I, s * n + m) += nrm[1] * mk;
        blk.E(I, s * n + m) -= tau * mk;
        blk.D(I, side_node(s, m, n)) += tau * mk;
      }
    }
    if (blk.dirichlet[s]) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      for (int t = 0; t < nq; ++t) {
        const auto pt = side_point(el, s, ref.quad.nodes[t]);
        const double g = spec.dirichlet ? spec.dirichlet(pt[0], pt[1]) : 0.0;
        rhs += (half * wq[t] * g) * V.row(t).transpose();
      }
      blk.boundary_trace.segment(s * n, n) = blk.facet_mass[s].llt().solve(rhs);
    }
  }

  blk.R = -blk.C * blk.boundary_trace;
  blk.F = blk.source_load - blk.E * blk.boundary_trace;
  return LocalSolver(element, ref.order(), std::move(blk));
}

CondensedBlock condense(const LocalSolver& ls) {
  const int n = ls.n1d();
  const Eigen::MatrixXd ce = ls.coupling();
  Eigen::MatrixXd z = ls.solve_local(ce);
  Eigen::VectorXd z0 = ls.solve_local(ls.load());
  z.bottomRows(n * n) *= -1.0;
  z0.tail(n * n) *= -1.0;
  CondensedBlock out;
  out.S = ce.transpose() * z;
  out.b = ce.transpose() * z0;
  for (int s = 0; s < kSidesPerElement; ++s)
    out.S.block(s * n, s * n, n, n) += ls.blocks().tau[s] * ls.blocks().facet_mass[s];
  // Symmetric in exact arithmetic; remove the rounding asymmetry.
  out.S = 0.5 * (out.S + out.S.transpose()).eval();
  return out;
}

Eigen::VectorXd interior_part(const LocalSolver& ls, const Eigen::VectorXd& trace) {
  const int n = ls.n1d();
  if (trace.size() != ls.trace_size())
    fail(ErrorCode::dimension_mismatch, "trace vector must have 4(p+1) entries");
  Eigen::VectorXd t = trace;
  for (int s = 0; s < kSidesPerElement; ++s)
    if (ls.blocks().dirichlet[s]) t.segment(s * n, n).setZero();
  return t;
}

LocalSolution reconstruct(const LocalSolver& ls, const Eigen::VectorXd& trace) {
  const int nn = ls.n1d() * ls.n1d();
  const Eigen::VectorXd lam = interior_part(ls, trace);
  const Eigen::VectorXd x = ls.solve_local(Eigen::VectorXd(ls.load() - ls.coupling() * lam));
  return {x.segment(0, nn), x.segment(nn, nn), x.segment(2 * nn, nn)};
}

double local_residual(const LocalSolver& ls, const LocalSolution& sol, const Eigen::VectorXd& trace) {
  const int nn = ls.n1d() * ls.n1d();
  Eigen::VectorXd x(3 * nn);
  x << sol.qx, sol.qy, sol.u;
  const Eigen::VectorXd lam = interior_part(ls, trace);
  const Eigen::VectorXd r = ls.local_matrix() * x + ls.coupling() * lam - ls.load();
  const double scale = (ls.local_matrix() * x).norm() + (ls.coupling() * lam).norm() + ls.load().norm();
  return scale > 0.0 ? r.norm() / scale : r.norm();
}

Eigen::VectorXd postprocess(const LocalSolution& sol, const ReferenceElement2D& ref, const Element& el,
                            const ScalarField& coefficient) {
  const int p = ref.order();
  if (p < 1) fail(ErrorCode::unsupported_order, "postprocessing needs p >= 1");
  const int n = p + 1;
  const Basis1D star = gll_nodes_weights(p + 1);
  const Basis1D rule = gl_nodes_weights(p + 1);  // p+2 points, exact to degree 2p+3
  const int ns = p + 2;
  const int m = ns * ns;
  const int nq = rule.size();
  const Eigen::MatrixXd Vs = eval_matrix(star, rule.nodes);
  const Eigen::MatrixXd Ds = derivative_matrix(star, rule.nodes);
  const Eigen::MatrixXd Vh = eval_matrix(ref.basis, rule.nodes);
  const double jac = 0.25 * el.dx() * el.dy();
  const double sx = 2.0 / el.dx(), sy = 2.0 / el.dy();

  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m + 1, m + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  Eigen::VectorXd phi(m), gx(m), gy(m), ph(n * n);
  for (int b = 0; b < nq; ++b)
    for (int a = 0; a < nq; ++a) {
      const double w = rule.quad_weights[a] * rule.quad_weights[b] * jac;
      const double x = el.x0 + 0.5 * el.dx() * (rule.nodes[a] + 1.0);
      const double y = el.y0 + 0.5 * el.dy() * (rule.nodes[b] + 1.0);
      for (int j = 0; j < ns; ++j)
        for (int i = 0; i < ns; ++i) {
          const int I = i + j * ns;
          phi[I] = Vs(a, i) * Vs(b, j);
          gx[I] = sx * Ds(a, i) * Vs(b, j);
          gy[I] = sy * Vs(a, i) * Ds(b, j);
        }
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) ph[i + j * n] = Vh(a, i) * Vh(b, j);
      const double kinv = 1.0 / coefficient(x, y);
      const double qx = ph.dot(sol.qx), qy = ph.dot(sol.qy), uh = ph.dot(sol.u);
      sys.topLeftCorner(m, m).noalias() += w * (gx * gx.transpose() + gy * gy.transpose());
      rhs.head(m) -= (w * kinv) * (qx * gx + qy * gy);
      sys.block(0, m, m, 1) += w * phi;
      rhs[m] += w * uh;
    }
  sys.block(m, 0, 1, m) = sys.block(0, m, m, 1).transpose();
  const Eigen::VectorXd x = sys.partialPivLu().solve(rhs);
  return x.head(m);
}

double postprocess_flops(int p) {
  const double m = (p + 2.0) * (p + 2.0) + 1.0;  // stiffness plus mean constraint
  const double nq = (p + 2.0) * (p + 2.0);
  // Assembly: 3 rank-one updates of size m per quadrature point; dense LU solve; triangular solves.
  return nq * 6.0 * m * m + (2.0 / 3.0) * m * m * m + 2.0 * m * m;
}

}  // namespace hdgmg
