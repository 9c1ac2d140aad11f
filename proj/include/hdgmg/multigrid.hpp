#pragma once

#include <Eigen/SparseCholesky>
#include <memory>
#include <optional>
#include <vector>

#include "hdgmg/discretization.hpp"
#include "hdgmg/fsai.hpp"

namespace hdgmg {

enum class CycleType { v, w, fmg };

/// How levels below the finest obtain their operator: the Galerkin product
/// P^T A P of the next finer level, or their own rediscretised trace system.
enum class CoarseOperator { galerkin, rediscretized };

/// Values prolongated onto fine facets interior to a coarse element under
/// h-coarsening: the discrete harmonic extension -A_II^{-1} A_IB P_B with the
/// fine level's operator, or the coarse element's local reconstruction of u.
enum class InteriorExtension { harmonic, local_solver };

/// Correction space on the h-levels: p=1 traces on each coarser mesh, or
/// continuous bilinear functions on its interior vertices. Rediscretised
/// hierarchies always use traces.
enum class HCoarseSpace { trace, continuous };

struct MultigridOptions {
  int nu1 = 2;
  int nu2 = 2;
  int fsai_power = 1;  ///< 1: lower(A) pattern, 2: lower(A^2), ...
  double omega = 1.0;
  /// When > 0, a level whose omega * lambda_max(G^T G A) exceeds this bound
  /// gets omega = bound / lambda_max.
  double omega_bound = 1.8;
  double fsai_drop_tol = 0.0;  ///< see FsaiSmoother::build
  int coarse_cap = 4096;
  CoarseOperator coarse_operator = CoarseOperator::galerkin;
  InteriorExtension interior_extension = InteriorExtension::harmonic;
  HCoarseSpace h_space = HCoarseSpace::continuous;
  DiscretizationOptions disc{};
};

/// Residual history of a stationary iteration.
class ConvergenceMonitor {
 public:
  void record(double residual_norm) { history_.push_back(residual_norm); }
  const std::vector<double>& history() const { return history_; }
  int iterations() const { return history_.empty() ? 0 : static_cast<int>(history_.size()) - 1; }
  /// rho_k = ||r_k|| / ||r_{k-1}||, k >= 1.
  double ratio(int k) const;
  std::vector<double> ratios() const;
  /// Geometric mean of the last `window` ratios whose residuals stay above
  /// floor_rel * ||r_0|| (roundoff tail excluded).
  double asymptotic_rate(int window = 5, double floor_rel = 1e-13) const;
  /// rho_k >= 1 on `window` consecutive iterations.
  bool diverged(int window = 5) const;
  double relative_residual() const;

 private:
  std::vector<double> history_;
};

struct MGLevel {
  enum class Kind { p_level, h_level, coarsest };

  Kind kind = Kind::coarsest;
  std::unique_ptr<Discretization> disc;
  /// Assembled level operator (the trace system on level 0, P^T A P below it under Galerkin coarsening).
  CsrMatrix matrix;
  bool matrix_free = false;
  bool continuous = false;  ///< unknowns are interior vertex values (HCoarseSpace::continuous)
  std::optional<FsaiSmoother> smoother;
  /// Maps the next coarser level's trace space into this one; restriction is its transpose.
  CsrMatrix prolongation;
  CsrMatrix restriction;

  /// Fine facets interior to a coarse element (h-transfer only): the coarse
  /// element and the rows whose values come from its local reconstruction.
  struct InteriorRows {
    int fine_block = -1;
    int coarse_element = -1;
    Eigen::MatrixXd basis_at_nodes;  ///< (n x n^2) coarse volume basis at the fine facet nodes
  };
  std::vector<InteriorRows> interior_rows;

  int order() const { return disc->order(); }
  const Mesh& mesh() const { return disc->mesh(); }
  int size() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

struct FmgReport {
  Eigen::VectorXd x;
  ErrorNorms fmg_error;
  ErrorNorms direct_error;
  double relative_residual = 0.0;
};

/// h/p geometric multigrid on the trace system. Level 0 is the finest; the
/// orders are decremented one at a time down to 1, then the mesh is halved
/// while it still has interior facets. Each coarse level carries its own
/// discretisation (used by the transfers); its operator is chosen by
/// MultigridOptions::coarse_operator.
class Hierarchy {
 public:
  Hierarchy(std::shared_ptr<const Mesh> fine_mesh, int fine_order, const ProblemSpec& spec,
            MultigridOptions opts = {});

  int num_levels() const { return static_cast<int>(levels_.size()); }
  const MGLevel& level(int l) const { return levels_[l]; }
  const MultigridOptions& options() const { return opts_; }
  const Discretization& fine() const { return *levels_.front().disc; }

  /// One cycle on level `l` (gamma = 1: V, gamma = 2: W) for A_l x = b.
  void cycle(int l, const Eigen::VectorXd& b, Eigen::VectorXd& x, int gamma) const;

  /// Repeats V or W cycles from x0 until ||r|| <= rel_tol ||b|| or max_cycles.
  Eigen::VectorXd solve(CycleType type, const Eigen::VectorXd& b, const Eigen::VectorXd& x0, double rel_tol,
                        int max_cycles, ConvergenceMonitor& monitor) const;

  /// Full multigrid: direct solve on the coarsest level, then prolongate and
  /// run one V-cycle on each finer level. Level right-hand sides are the
  /// restricted fine load (Galerkin) or each level's own load (rediscretised).
  FmgReport fmg() const;

  /// Linear correction transfer between level l+1 and level l.
  Eigen::VectorXd prolongate(int l, const Eigen::VectorXd& coarse) const;
  Eigen::VectorXd restrict_to_coarse(int l, const Eigen::VectorXd& fine) const;
  /// Affine transfer of a solution: interior-facet values come from the coarse
  /// local reconstruction including its data terms.
  Eigen::VectorXd prolongate_solution(int l, const Eigen::VectorXd& coarse) const;

  Eigen::VectorXd coarse_solve(const Eigen::VectorXd& b) const;
  /// Right-hand side used for level l in full multigrid.
  Eigen::VectorXd level_rhs(int l) const;

 private:
  void build_transfer(int l);
  void build_continuous_transfer(int l);

  MultigridOptions opts_;
  std::vector<MGLevel> levels_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> coarse_;
};

/// p-embedding matrix: coarse order-(p-1) facet values evaluated at fine GLL nodes, block diagonal.
CsrMatrix p_prolongation(const TraceLayout& fine, const TraceLayout& coarse, int fine_order, int coarse_order);

}  // namespace hdgmg
