#pragma once

#include <Eigen/Dense>
#include <array>

#include "hdgmg/basis.hpp"
#include "hdgmg/mesh.hpp"
#include "hdgmg/problem.hpp"

namespace hdgmg {

/// Element matrices of the LDG-H scheme, local dof layout
/// [q_x (n^2) | q_y (n^2) | u (n^2)] for the volume and four facet blocks of
/// n = p+1 trace values in (bottom, right, top, left) order.
///
///   A Q - B^T U + C Lambda = R
///   B Q + D U   + E Lambda = F
struct LocalBlocks {
  Eigen::MatrixXd A;  ///< (K^{-1} q, v), 2n^2 square
  Eigen::MatrixXd B;  ///< (div q, w), n^2 x 2n^2
  Eigen::MatrixXd C;  ///< <lambda, v.n>, 2n^2 x 4n
  Eigen::MatrixXd D;  ///< <tau u, w> over the element boundary, n^2 square
  Eigen::MatrixXd E;  ///< -<tau lambda, w>, n^2 x 4n
  Eigen::VectorXd R, F;
  Eigen::VectorXd source_load;  ///< (f, w)
  std::array<Eigen::MatrixXd, 4> facet_mass;  ///< M_e per side
  std::array<double, 4> tau{};
  std::array<bool, 4> dirichlet{};
  Eigen::VectorXd boundary_trace;  ///< P_h g_D on Dirichlet sides, zero elsewhere (4n)
};

struct LocalSolution {
  Eigen::VectorXd qx, qy, u;  ///< nodal values at the GLL tensor nodes
};

/// Element contribution to the trace system: S Lambda_K = b on the element's facets.
struct CondensedBlock {
  Eigen::MatrixXd S;  ///< 4n square, symmetric
  Eigen::VectorXd b;  ///< 4n
};

class LocalSolver {
 public:
  LocalSolver(int element, int order, LocalBlocks blocks);

  int element() const { return element_; }
  int order() const { return order_; }
  int n1d() const { return order_ + 1; }
  int volume_size() const { return 3 * n1d() * n1d(); }
  int trace_size() const { return 4 * n1d(); }
  const LocalBlocks& blocks() const { return blocks_; }

  /// The factorised saddle-point block [A -B^T; B D].
  const Eigen::MatrixXd& local_matrix() const { return local_; }
  Eigen::VectorXd solve_local(const Eigen::VectorXd& rhs) const { return lu_.solve(rhs); }
  Eigen::MatrixXd solve_local(const Eigen::MatrixXd& rhs) const { return lu_.solve(rhs); }

  /// Stacked coupling [C; E] and load [R; F].
  Eigen::MatrixXd coupling() const;
  Eigen::VectorXd load() const;

 private:
  int element_;
  int order_;
  LocalBlocks blocks_;
  Eigen::MatrixXd local_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// Assembles every block by GL quadrature and factorises the local matrix.
/// Boundary facets fold the L2 projection of g_D into R, F and boundary_trace.
LocalSolver assemble_local(const Mesh& mesh, int element, const ProblemSpec& spec,
                           const ReferenceElement2D& ref);

/// Eliminates (Q, U): S = [C;E]^T J L^{-1} [C;E] + tau M, b = [C;E]^T J L^{-1} [R;F],
/// with J = diag(I, -I). Rows/columns of Dirichlet sides are kept (zero
/// trace unknowns there); the global assembly skips them.
CondensedBlock condense(const LocalSolver& ls);

/// Recovers (Q, U) from the facet values. Entries of Dirichlet sides in `trace` are ignored.
LocalSolution reconstruct(const LocalSolver& ls, const Eigen::VectorXd& trace);

/// Residual of the two local equations for (Q, U, Lambda); relative to the load scale.
double local_residual(const LocalSolver& ls, const LocalSolution& sol, const Eigen::VectorXd& trace);

/// Returns the trace vector with Dirichlet sides zeroed.
Eigen::VectorXd interior_part(const LocalSolver& ls, const Eigen::VectorXd& trace);

/// Superconvergent potential in Q_{p+1}: (grad u*, grad w) = -(K^{-1} q_h, grad w)
/// with (u*, 1) = (u_h, 1). Values at the order-(p+1) GLL tensor nodes.
/// Throws unsupported_order for p = 0.
Eigen::VectorXd postprocess(const LocalSolution& sol, const ReferenceElement2D& ref, const Element& element,
                            const ScalarField& coefficient);

/// Dense-solve FLOP estimate for one element's postprocessing at order p.
double postprocess_flops(int p);

}  // namespace hdgmg
