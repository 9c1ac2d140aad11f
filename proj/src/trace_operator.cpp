#include "hdgmg/trace_operator.hpp"

#include "hdgmg/error.hpp"

namespace hdgmg {

TraceLayout TraceLayout::build(const Mesh& mesh, int order) {
  TraceLayout l;
  l.n1d = order + 1;
  l.block_of_facet.assign(mesh.num_facets(), -1);
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    if (mesh.facet(static_cast<int>(f)).boundary) continue;
    l.block_of_facet[f] = static_cast<int>(l.facet_of_block.size());
    l.facet_of_block.push_back(static_cast<int>(f));
  }
  return l;
}

TraceOperator::TraceOperator(const Mesh& mesh, int order, const std::vector<CondensedBlock>& blocks)
    : order_(order), n_(order + 1), layout_(TraceLayout::build(mesh, order)) {
  if (blocks.size() != mesh.num_elements())
    fail(ErrorCode::dimension_mismatch, "one condensed block per element is required");
  const int m = 4 * n_;
  stride_ = static_cast<std::size_t>(m) * m;
  blocks_.resize(stride_ * blocks.size());
  for (std::size_t e = 0; e < blocks.size(); ++e) {
    if (blocks[e].S.rows() != m || blocks[e].S.cols() != m)
      fail(ErrorCode::dimension_mismatch, "condensed block has the wrong order");
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        blocks_.data() + e * stride_, m, m) = blocks[e].S;
  }
  elem_blocks_.resize(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    for (int s = 0; s < kSidesPerElement; ++s)
      elem_blocks_[e][s] = layout_.block_of_facet[mesh.element_facets(static_cast<int>(e))[s]];
  work_.resize(layout_.num_blocks());
  for (int b = 0; b < layout_.num_blocks(); ++b) {
    const Facet& f = mesh.facet(layout_.facet_of_block[b]);
    work_[b].owners = f.owner_count;
    for (int k = 0; k < f.owner_count; ++k) {
      work_[b].element[k] = f.owners[k].element;
      work_[b].side[k] = f.owners[k].side;
    }
  }
}

void TraceOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(size()) || y.size() != x.size())
    fail(ErrorCode::dimension_mismatch, "trace vector length does not match the operator");
  const int n = n_;
  const int m = 4 * n;
  const int nb = layout_.num_blocks();
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    const FacetWork& w = work_[b];
    double acc[32] = {};  // n <= 32 stays on the stack
    std::vector<double> heap;
    double* yb = acc;
    if (n > 32) {
      heap.assign(n, 0.0);
      yb = heap.data();
    }
    for (int k = 0; k < w.owners; ++k) {
      const int e = w.element[k];
      const double* S = blocks_.data() + static_cast<std::size_t>(e) * stride_;
      const auto& eb = elem_blocks_[e];
      const int row0 = w.side[k] * n;
      for (int s = 0; s < kSidesPerElement; ++s) {
        const int src = eb[s];
        if (src < 0) continue;
        const double* xs = x.data() + static_cast<std::size_t>(src) * n;
        for (int i = 0; i < n; ++i) {
          const double* row = S + static_cast<std::size_t>(row0 + i) * m + s * n;
          double sum = 0.0;
          for (int j = 0; j < n; ++j) sum += row[j] * xs[j];
          yb[i] += sum;
        }
      }
    }
    double* out = y.data() + static_cast<std::size_t>(b) * n;
    for (int i = 0; i < n; ++i) out[i] = yb[i];
  }
}

Eigen::VectorXd TraceOperator::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(x.size());
  apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
        std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
  return y;
}

CsrMatrix TraceOperator::assemble_csr() const {
  const int n = n_;
  const int m = 4 * n;
  std::vector<Eigen::Triplet<double, int>> trip;
  trip.reserve(static_cast<std::size_t>(layout_.num_blocks()) * 7 * n * n);
  for (std::size_t e = 0; e < elem_blocks_.size(); ++e) {
    const double* S = blocks_.data() + e * stride_;
    for (int sr = 0; sr < kSidesPerElement; ++sr) {
      const int br = elem_blocks_[e][sr];
      if (br < 0) continue;
      for (int sc = 0; sc < kSidesPerElement; ++sc) {
        const int bc = elem_blocks_[e][sc];
        if (bc < 0) continue;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            trip.emplace_back(br * n + i, bc * n + j, S[static_cast<std::size_t>(sr * n + i) * m + sc * n + j]);
      }
    }
  }
  CsrMatrix A(size(), size());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

MatvecCounters TraceOperator::counters(MatvecMode mode) const {
  MatvecCounters c;
  const double n = n_;
  if (mode == MatvecMode::csr) {
    // Column blocks of a block row: interior facets of both owners, the shared one once.
    double nnz = 0.0;
    for (const FacetWork& w : work_) {
      int cols = -(w.owners - 1);
      for (int k = 0; k < w.owners; ++k)
        for (int s = 0; s < kSidesPerElement; ++s) cols += elem_blocks_[w.element[k]][s] >= 0;
      nnz += cols * n * n;
    }
    const double rows = size();
    c.flops = 2.0 * nnz - rows;
    c.bytes = 8.0 * nnz + 4.0 * (nnz + rows + 1.0) + 8.0 * (2.0 * rows);
    return c;
  }
  // Per facet: each owner contributes n rows of `rowlen` multiply-adds over the
  // owner's interior facet values; values, x gathers and the y block are streamed.
  for (const FacetWork& w : work_) {
    double flops = 0.0, bytes = 8.0 * n;
    for (int k = 0; k < w.owners; ++k) {
      int interior = 0;
      for (int s = 0; s < kSidesPerElement; ++s) interior += elem_blocks_[w.element[k]][s] >= 0;
      const double rowlen = n * interior;
      flops += 2.0 * n * rowlen;
      bytes += 8.0 * (n * rowlen + rowlen);
    }
    c.flops += flops - n;
    c.bytes += bytes;
  }
  return c;
}

Eigen::VectorXd assemble_rhs(const Mesh& mesh, const TraceLayout& layout, const std::vector<CondensedBlock>& blocks) {
  const int n = layout.n1d;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(layout.size());
  for (int blk = 0; blk < layout.num_blocks(); ++blk) {
    const Facet& f = mesh.facet(layout.facet_of_block[blk]);
    for (int k = 0; k < f.owner_count; ++k)
      b.segment(blk * n, n) += blocks[f.owners[k].element].b.segment(f.owners[k].side * n, n);
  }
  return b;
}

Eigen::VectorXd gather_element_trace(const Mesh& mesh, const TraceLayout& layout, int element,
                                     const Eigen::VectorXd& x) {
  const int n = layout.n1d;
  Eigen::VectorXd t = Eigen::VectorXd::Zero(4 * n);
  const auto& facets = mesh.element_facets(element);
  for (int s = 0; s < kSidesPerElement; ++s) {
    const int blk = layout.block_of_facet[facets[s]];
    if (blk >= 0) t.segment(s * n, n) = x.segment(blk * n, n);
  }
  return t;
}

}  // namespace hdgmg
