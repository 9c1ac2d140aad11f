#pragma once

#include <memory>
#include <vector>

#include "hdgmg/basis.hpp"
#include "hdgmg/hdg_local.hpp"
#include "hdgmg/mesh.hpp"
#include "hdgmg/problem.hpp"
#include "hdgmg/trace_operator.hpp"

namespace hdgmg {

struct DiscretizationOptions {
  int quad_points = 0;  ///< GL points per direction; p+1 when <= 0
};

struct ErrorNorms {
  double u = 0.0;       ///< ||u_h - u||
  double q = 0.0;       ///< ||q_h - q||
  double u_star = 0.0;  ///< ||u*_h - u||, NaN when p = 0
};

/// HDG discretisation of one (mesh, order) pair: local solvers, condensed
/// element blocks, trace operator and right-hand side.
class Discretization {
 public:
  Discretization(std::shared_ptr<const Mesh> mesh, int order, ProblemSpec spec, DiscretizationOptions opts = {});

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int order() const { return order_; }
  const ProblemSpec& spec() const { return spec_; }
  const ReferenceElement2D& reference() const { return ref_; }
  const std::vector<LocalSolver>& locals() const { return locals_; }
  const std::vector<CondensedBlock>& condensed() const { return condensed_; }
  const TraceOperator& op() const { return *op_; }
  const TraceLayout& layout() const { return op_->layout(); }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  int size() const { return op_->size(); }

  /// Assembled operator, built lazily once.
  const CsrMatrix& csr() const;

  /// Sparse LDL^T solve of the trace system.
  Eigen::VectorXd solve_direct() const;
  Eigen::VectorXd solve_direct(const Eigen::VectorXd& b) const;

  LocalSolution reconstruct_element(int element, const Eigen::VectorXd& trace) const;
  std::vector<LocalSolution> reconstruct_all(const Eigen::VectorXd& trace) const;

  /// L2 errors against spec().exact_u / exact_q.
  ErrorNorms errors(const Eigen::VectorXd& trace, bool with_postprocess = true) const;

  /// L2 projection of a function onto the interior-facet trace space.
  Eigen::VectorXd project_trace(const ScalarField& g) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int order_;
  ProblemSpec spec_;
  ReferenceElement2D ref_;
  std::vector<LocalSolver> locals_;
  std::vector<CondensedBlock> condensed_;
  std::unique_ptr<TraceOperator> op_;
  Eigen::VectorXd rhs_;
  mutable std::unique_ptr<CsrMatrix> csr_;
};

}  // namespace hdgmg
