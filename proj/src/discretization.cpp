#include "hdgmg/discretization.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>

#include "hdgmg/error.hpp"

namespace hdgmg {

Discretization::Discretization(std::shared_ptr<const Mesh> mesh, int order, ProblemSpec spec,
                               DiscretizationOptions opts)
    : mesh_(std::move(mesh)), order_(order), spec_(std::move(spec)) {
  if (!mesh_) fail(ErrorCode::invalid_argument, "mesh is null");
  if (order < 1) fail(ErrorCode::unsupported_order, "trace discretisation needs p >= 1");
  if (!spec_.coefficient) fail(ErrorCode::invalid_argument, "problem has no coefficient");
  ref_ = make_reference_element(order, opts.quad_points);
  const int ne = static_cast<int>(mesh_->num_elements());
  locals_.reserve(ne);
  for (int e = 0; e < ne; ++e) locals_.push_back(assemble_local(*mesh_, e, spec_, ref_));
  condensed_.resize(ne);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) condensed_[e] = condense(locals_[e]);
  op_ = std::make_unique<TraceOperator>(*mesh_, order, condensed_);
  rhs_ = assemble_rhs(*mesh_, op_->layout(), condensed_);
}

const CsrMatrix& Discretization::csr() const {
  if (!csr_) csr_ = std::make_unique<CsrMatrix>(op_->assemble_csr());
  return *csr_;
}

Eigen::VectorXd Discretization::solve_direct() const { return solve_direct(rhs_); }

Eigen::VectorXd Discretization::solve_direct(const Eigen::VectorXd& b) const {
  if (size() == 0) return Eigen::VectorXd();
  Eigen::SparseMatrix<double> A = csr();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) fail(ErrorCode::numerical_breakdown, "sparse LDL^T of trace system failed");
  return ldlt.solve(b);
}

LocalSolution Discretization::reconstruct_element(int element, const Eigen::VectorXd& trace) const {
  return reconstruct(locals_[element], gather_element_trace(*mesh_, layout(), element, trace));
}

std::vector<LocalSolution> Discretization::reconstruct_all(const Eigen::VectorXd& trace) const {
  const int ne = static_cast<int>(locals_.size());
  std::vector<LocalSolution> out(ne);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) out[e] = reconstruct_element(e, trace);
  return out;
}

ErrorNorms Discretization::errors(const Eigen::VectorXd& trace, bool with_postprocess) const {
  if (!spec_.has_exact() || !spec_.exact_q) fail(ErrorCode::configuration, "problem has no exact solution");
  const int p = order_;
  const int n = p + 1;
  const Basis1D rule = gl_nodes_weights(p + 4);
  const int nq = rule.size();
  const Eigen::MatrixXd Vh = eval_matrix(ref_.basis, rule.nodes);
  const Basis1D star = gll_nodes_weights(p + 1);
  const Eigen::MatrixXd Vs = eval_matrix(star, rule.nodes);
  const int ns = p + 2;
  const auto sols = reconstruct_all(trace);

  double eu = 0.0, eq = 0.0, es = 0.0;
  for (std::size_t e = 0; e < sols.size(); ++e) {
    const Element& el = mesh_->element(static_cast<int>(e));
    const double jac = 0.25 * el.dx() * el.dy();
    Eigen::VectorXd ustar;
    if (with_postprocess) ustar = postprocess(sols[e], ref_, el, spec_.coefficient);
    for (int b = 0; b < nq; ++b)
      for (int a = 0; a < nq; ++a) {
        const double x = el.x0 + 0.5 * el.dx() * (rule.nodes[a] + 1.0);
        const double y = el.y0 + 0.5 * el.dy() * (rule.nodes[b] + 1.0);
        const double w = rule.quad_weights[a] * rule.quad_weights[b] * jac;
        double uh = 0.0, qx = 0.0, qy = 0.0;
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) {
            const double phi = Vh(a, i) * Vh(b, j);
            const int I = i + j * n;
            uh += phi * sols[e].u[I];
            qx += phi * sols[e].qx[I];
            qy += phi * sols[e].qy[I];
          }
        const double ue = spec_.exact_u(x, y);
        const auto qe = spec_.exact_q(x, y);
        eu += w * (uh - ue) * (uh - ue);
        eq += w * ((qx - qe[0]) * (qx - qe[0]) + (qy - qe[1]) * (qy - qe[1]));
        if (with_postprocess) {
          double us = 0.0;
          for (int j = 0; j < ns; ++j)
            for (int i = 0; i < ns; ++i) us += Vs(a, i) * Vs(b, j) * ustar[i + j * ns];
          es += w * (us - ue) * (us - ue);
        }
      }
  }
  ErrorNorms out;
  out.u = std::sqrt(eu);
  out.q = std::sqrt(eq);
  out.u_star = with_postprocess ? std::sqrt(es) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

Eigen::VectorXd Discretization::project_trace(const ScalarField& g) const {
  const TraceLayout& l = layout();
  const int n = l.n1d;
  const Basis1D rule = gl_nodes_weights(order_ + 2);
  const Eigen::MatrixXd V = eval_matrix(ref_.basis, rule.nodes);
  Eigen::MatrixXd mref = Eigen::MatrixXd::Zero(n, n);
  for (int t = 0; t < rule.size(); ++t) mref += rule.quad_weights[t] * V.row(t).transpose() * V.row(t);
  const Eigen::LLT<Eigen::MatrixXd> llt(mref);
  Eigen::VectorXd out(l.size());
  for (int b = 0; b < l.num_blocks(); ++b) {
    const Facet& f = mesh_->facet(l.facet_of_block[b]);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < rule.size(); ++t) {
      const double s = 0.5 * (rule.nodes[t] + 1.0);
      const double x = f.xa + s * (f.xb - f.xa), y = f.ya + s * (f.yb - f.ya);
      rhs += rule.quad_weights[t] * g(x, y) * V.row(t).transpose();
    }
    out.segment(b * n, n) = llt.solve(rhs);
  }
  return out;
}

}  // namespace hdgmg
