#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <span>
#include <vector>

#include "hdgmg/hdg_local.hpp"
#include "hdgmg/mesh.hpp"

namespace hdgmg {

using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// Trace unknowns live on interior facets only, one block of p+1 values per
/// facet, blocks ordered by mesh facet id.
struct TraceLayout {
  int n1d = 0;
  std::vector<int> facet_of_block;   ///< block -> mesh facet
  std::vector<int> block_of_facet;   ///< mesh facet -> block, -1 on the boundary

  int num_blocks() const { return static_cast<int>(facet_of_block.size()); }
  int size() const { return num_blocks() * n1d; }
  static TraceLayout build(const Mesh& mesh, int order);
};

enum class MatvecMode { matrix_free, csr };

struct MatvecCounters {
  double flops = 0.0;
  double bytes = 0.0;
  double arithmetic_intensity() const { return bytes > 0.0 ? flops / bytes : 0.0; }
};

/// Global condensed operator, applied facet by facet.
///
/// Each output block is written by exactly one work item (its facet), which
/// reads the condensed blocks of the at most two owner elements and the trace
/// values on their facets. No atomics or barriers inside one application.
class TraceOperator {
 public:
  TraceOperator(const Mesh& mesh, int order, const std::vector<CondensedBlock>& blocks);

  const TraceLayout& layout() const { return layout_; }
  int size() const { return layout_.size(); }
  int order() const { return order_; }

  /// y = A x without assembling A.
  void apply(std::span<const double> x, std::span<double> y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  /// Explicit scatter of the element blocks into CSR; used as oracle and baseline.
  CsrMatrix assemble_csr() const;

  /// Analytic work/traffic of one matvec for the given mode.
  MatvecCounters counters(MatvecMode mode) const;

 private:
  struct FacetWork {
    int owners = 0;
    int element[2] = {-1, -1};
    int side[2] = {-1, -1};
  };

  int order_;
  int n_;
  TraceLayout layout_;
  std::vector<FacetWork> work_;                 // Map0/Map1: block -> owners
  std::vector<std::array<int, 4>> elem_blocks_;  // Map2/Map3: element side -> block (or -1)
  std::vector<double> blocks_;                   // element S_K, row-major, (4n)^2 each
  std::size_t stride_;
};

/// Right-hand side: sum of condensed loads over the owners of each interior facet.
Eigen::VectorXd assemble_rhs(const Mesh& mesh, const TraceLayout& layout, const std::vector<CondensedBlock>& blocks);

/// Gathers the element's four facet blocks (Dirichlet sides zero).
Eigen::VectorXd gather_element_trace(const Mesh& mesh, const TraceLayout& layout, int element,
                                     const Eigen::VectorXd& x);

}  // namespace hdgmg
