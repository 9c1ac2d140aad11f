#include "hdgmg/multigrid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "hdgmg/error.hpp"

namespace hdgmg {

// ---------------------------------------------------------------------------
// ConvergenceMonitor

double ConvergenceMonitor::ratio(int k) const {
  if (k < 1 || k >= static_cast<int>(history_.size())) fail(ErrorCode::invalid_argument, "ratio index out of range");
  return history_[k - 1] > 0.0 ? history_[k] / history_[k - 1] : 0.0;
}

std::vector<double> ConvergenceMonitor::ratios() const {
  std::vector<double> out;
  for (int k = 1; k < static_cast<int>(history_.size()); ++k) out.push_back(ratio(k));
  return out;
}

double ConvergenceMonitor::asymptotic_rate(int window, double floor_rel) const {
  if (history_.size() < 2) return 0.0;
  int last = static_cast<int>(history_.size()) - 1;
  const double floor = floor_rel * history_.front();
  while (last > 1 && history_[last] < floor) --last;
  const int first = std::max(1, last - window + 1);
  double logsum = 0.0;
  for (int k = first; k <= last; ++k) logsum += std::log(std::max(ratio(k), 1e-300));
  return std::exp(logsum / (last - first + 1));
}

bool ConvergenceMonitor::diverged(int window) const {
  int run = 0;
  for (int k = 1; k < static_cast<int>(history_.size()); ++k) {
    run = ratio(k) >= 1.0 ? run + 1 : 0;
    if (run >= window) return true;
  }
  return false;
}

double ConvergenceMonitor::relative_residual() const {
  if (history_.empty() || history_.front() == 0.0) return 0.0;
  return history_.back() / history_.front();
}

// ---------------------------------------------------------------------------
// Transfers

CsrMatrix p_prolongation(const TraceLayout& fine, const TraceLayout& coarse, int fine_order, int coarse_order) {
  if (fine.num_blocks() != coarse.num_blocks())
    fail(ErrorCode::invalid_argument, "p-transfer needs levels on the same mesh");
  const Basis1D from = gll_nodes_weights(coarse_order);
  const Basis1D to = gll_nodes_weights(fine_order);
  const Eigen::MatrixXd E = eval_matrix(from, to.nodes);
  const int nf = fine.n1d, nc = coarse.n1d;
  std::vector<Eigen::Triplet<double, int>> trip;
  trip.reserve(static_cast<std::size_t>(fine.num_blocks()) * nf * nc);
  for (int b = 0; b < fine.num_blocks(); ++b)
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nc; ++j)
        if (E(i, j) != 0.0) trip.emplace_back(b * nf + i, b * nc + j, E(i, j));
  CsrMatrix P(fine.size(), coarse.size());
  P.setFromTriplets(trip.begin(), trip.end());
  P.makeCompressed();
  return P;
}

namespace {

// Which part of the coarse mesh a fine interior facet lies on.
struct FinePlacement {
  bool on_coarse_facet = false;
  int coarse_facet = -1;    // when on_coarse_facet
  int coarse_element = -1;  // otherwise
  Axis axis = Axis::horizontal;
  int half = 0;             // 0: first half along the facet direction, 1: second
};

FinePlacement place(const Mesh& fine, const Mesh& coarse, int fine_facet) {
  FinePlacement pl;
  const int nx = fine.nx(), ny = fine.ny();
  const int nh = nx * (ny + 1);
  if (fine_facet < nh) {
    const int i = fine_facet % nx, j = fine_facet / nx;
    pl.axis = Axis::horizontal;
    pl.half = i % 2;
    if (j % 2 == 0) {
      pl.on_coarse_facet = true;
      pl.coarse_facet = coarse.horizontal_facet(i / 2, j / 2);
    } else {
      pl.coarse_element = coarse.element_id(i / 2, j / 2);
    }
  } else {
    const int k = fine_facet - nh;
    const int i = k / ny, j = k % ny;
    pl.axis = Axis::vertical;
    pl.half = j % 2;
    if (i % 2 == 0) {
      pl.on_coarse_facet = true;
      pl.coarse_facet = coarse.vertical_facet(i / 2, j / 2);
    } else {
      pl.coarse_element = coarse.element_id(i / 2, j / 2);
    }
  }
  return pl;
}

// Replaces the rows of fine facets interior to coarse elements by the discrete
// harmonic extension -A_II^{-1} A_IB P_B of the boundary rows, per coarse element.
void harmonic_interior(MGLevel& fine, int n) {
  const CsrMatrix& A = fine.matrix;
  const CsrMatrix& P = fine.prolongation;
  std::vector<char> interior(P.rows(), 0);
  std::map<int, std::vector<int>> groups;
  for (const auto& r : fine.interior_rows) {
    for (int i = 0; i < n; ++i) {
      interior[r.fine_block * n + i] = 1;
      groups[r.coarse_element].push_back(r.fine_block * n + i);
    }
  }
  std::vector<Eigen::Triplet<double, int>> trip;
  for (int i = 0; i < P.rows(); ++i)
    if (!interior[i])
      for (CsrMatrix::InnerIterator it(P, i); it; ++it) trip.emplace_back(i, it.col(), it.value());
  CsrMatrix PB(P.rows(), P.cols());
  PB.setFromTriplets(trip.begin(), trip.end());
  const CsrMatrix W = A * PB;
  std::vector<int> local(P.rows(), -1);
  for (const auto& [ce, rows] : groups) {
    const int m = static_cast<int>(rows.size());
    for (int k = 0; k < m; ++k) local[rows[k]] = k;
    Eigen::MatrixXd Aii = Eigen::MatrixXd::Zero(m, m);
    std::map<int, int> colmap;
    for (int k = 0; k < m; ++k) {
      for (CsrMatrix::InnerIterator it(A, rows[k]); it; ++it)
        if (local[it.col()] >= 0) Aii(k, local[it.col()]) = it.value();
      for (CsrMatrix::InnerIterator it(W, rows[k]); it; ++it) colmap.emplace(it.col(), 0);
    }
    int c = 0;
    for (auto& [col, idx] : colmap) idx = c++;
    Eigen::MatrixXd Wi = Eigen::MatrixXd::Zero(m, c);
    for (int k = 0; k < m; ++k)
      for (CsrMatrix::InnerIterator it(W, rows[k]); it; ++it) Wi(k, colmap[it.col()]) = it.value();
    const Eigen::MatrixXd X = -Aii.ldlt().solve(Wi);
    for (int k = 0; k < m; ++k)
      for (const auto& [col, idx] : colmap) trip.emplace_back(rows[k], col, X(k, idx));
    for (int k = 0; k < m; ++k) local[rows[k]] = -1;
  }
  fine.prolongation.setZero();
  fine.prolongation.setFromTriplets(trip.begin(), trip.end());
  fine.prolongation.makeCompressed();
}

int vertex_id(const Mesh& m, int i, int j) {
  if (i <= 0 || j <= 0 || i >= m.nx() || j >= m.ny()) return -1;
  return (i - 1) + (j - 1) * (m.nx() - 1);
}

int num_interior_vertices(const Mesh& m) { return (m.nx() - 1) * (m.ny() - 1); }

// Bilinear interpolation from the interior vertices of `coarse` to those of `fine`.
std::vector<Eigen::Triplet<double, int>> bilinear(const Mesh& fine, const Mesh& coarse) {
  std::vector<Eigen::Triplet<double, int>> trip;
  for (int J = 1; J < fine.ny(); ++J)
    for (int I = 1; I < fine.nx(); ++I) {
      const int r = vertex_id(fine, I, J);
      const int is[2] = {I / 2, (I + 1) / 2}, js[2] = {J / 2, (J + 1) / 2};
      const double wi = I % 2 ? 0.5 : 1.0, wj = J % 2 ? 0.5 : 1.0;
      for (int a = 0; a < (I % 2 ? 2 : 1); ++a)
        for (int b = 0; b < (J % 2 ? 2 : 1); ++b) {
          const int c = vertex_id(coarse, is[a], js[b]);
          if (c >= 0) trip.emplace_back(r, c, wi * wj);
        }
    }
  return trip;
}

}  // namespace

int MGLevel::size() const { return continuous ? num_interior_vertices(mesh()) : disc->size(); }

void Hierarchy::build_continuous_transfer(int l) {
  MGLevel& fine = levels_[l];
  const MGLevel& coarse = levels_[l + 1];
  const Mesh& fm = fine.mesh();
  const Mesh& cm = coarse.mesh();
  CsrMatrix I(num_interior_vertices(fm), num_interior_vertices(cm));
  if (&fm == &cm || (fm.nx() == cm.nx() && fm.ny() == cm.ny())) {
    I.setIdentity();
  } else {
    const auto tv = bilinear(fm, cm);
    I.setFromTriplets(tv.begin(), tv.end());
  }
  if (fine.continuous) {
    fine.prolongation = I;
  } else {
    // Linear facet traces of the bilinear functions at the fine GLL nodes.
    const int n = fine.order() + 1;
    const Basis1D gll = gll_nodes_weights(fine.order());
    const TraceLayout& fl = fine.disc->layout();
    std::vector<Eigen::Triplet<double, int>> trip;
    const int nh = fm.nx() * (fm.ny() + 1);
    for (int b = 0; b < fl.num_blocks(); ++b) {
      const int f = fl.facet_of_block[b];
      int i0, j0, i1, j1;
      if (f < nh) {
        i0 = f % fm.nx(), j0 = f / fm.nx(), i1 = i0 + 1, j1 = j0;
      } else {
        i0 = (f - nh) / fm.ny(), j0 = (f - nh) % fm.ny(), i1 = i0, j1 = j0 + 1;
      }
      const int v0 = vertex_id(fm, i0, j0), v1 = vertex_id(fm, i1, j1);
      for (int k = 0; k < n; ++k) {
        const double t = gll.nodes[k];
        if (v0 >= 0 && t < 1.0) trip.emplace_back(b * n + k, v0, 0.5 * (1.0 - t));
        if (v1 >= 0 && t > -1.0) trip.emplace_back(b * n + k, v1, 0.5 * (1.0 + t));
      }
    }
    CsrMatrix T(fl.size(), I.rows());
    T.setFromTriplets(trip.begin(), trip.end());
    fine.prolongation = T * I;
  }
  fine.prolongation.makeCompressed();
  fine.restriction = fine.prolongation.transpose();
  fine.restriction.makeCompressed();
}

void Hierarchy::build_transfer(int l) {
  MGLevel& fine = levels_[l];
  const MGLevel& coarse = levels_[l + 1];
  if (coarse.continuous) {
    build_continuous_transfer(l);
    return;
  }
  if (fine.kind == MGLevel::Kind::p_level) {
    fine.prolongation = p_prolongation(fine.disc->layout(), coarse.disc->layout(), fine.order(), coarse.order());
  } else {
    const Mesh& fm = fine.mesh();
    const Mesh& cm = coarse.mesh();
    const int p = fine.order();
    const int n = p + 1;
    const Basis1D gll = gll_nodes_weights(p);
    std::vector<double> first(n), second(n);
    for (int k = 0; k < n; ++k) {
      first[k] = 0.5 * (gll.nodes[k] - 1.0);
      second[k] = 0.5 * (gll.nodes[k] + 1.0);
    }
    const Eigen::MatrixXd E0 = eval_matrix(gll, first), E1 = eval_matrix(gll, second);
    const Eigen::MatrixXd Vmid = eval_matrix(gll, std::vector<double>{0.0});

    // Volume potential of each coarse element as a map of its four facet blocks: U = -[L^{-1}[C;E]]_u.
    const auto& clocals = coarse.disc->locals();
    std::vector<Eigen::MatrixXd> uz(clocals.size());
    for (std::size_t e = 0; e < clocals.size(); ++e)
      uz[e] = -clocals[e].solve_local(clocals[e].coupling()).bottomRows(n * n);

    const TraceLayout& fl = fine.disc->layout();
    const TraceLayout& cl = coarse.disc->layout();
    std::vector<Eigen::Triplet<double, int>> trip;
    fine.interior_rows.clear();
    for (int b = 0; b < fl.num_blocks(); ++b) {
      const FinePlacement pl = place(fm, cm, fl.facet_of_block[b]);
      const Eigen::MatrixXd& Eh = pl.half == 0 ? E0 : E1;
      if (pl.on_coarse_facet) {
        const int cb = cl.block_of_facet[pl.coarse_facet];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            if (Eh(i, j) != 0.0) trip.emplace_back(b * n + i, cb * n + j, Eh(i, j));
        continue;
      }
      // Coarse volume basis at the fine nodes along the element midline.
      Eigen::MatrixXd phi(n, n * n);
      for (int k = 0; k < n; ++k)
        for (int jj = 0; jj < n; ++jj)
          for (int ii = 0; ii < n; ++ii) {
            const double lx = pl.axis == Axis::horizontal ? Eh(k, ii) : Vmid(0, ii);
            const double ly = pl.axis == Axis::horizontal ? Vmid(0, jj) : Eh(k, jj);
            phi(k, ii + jj * n) = lx * ly;
          }
      const Eigen::MatrixXd rows = phi * uz[pl.coarse_element];
      const auto& cf = cm.element_facets(pl.coarse_element);
      for (int s = 0; s < kSidesPerElement; ++s) {
        const int cb = cl.block_of_facet[cf[s]];
        if (cb < 0) continue;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double v = rows(i, s * n + j);
            if (v != 0.0) trip.emplace_back(b * n + i, cb * n + j, v);
          }
      }
      fine.interior_rows.push_back({b, pl.coarse_element, phi});
    }
    fine.prolongation.resize(fl.size(), cl.size());
    fine.prolongation.setFromTriplets(trip.begin(), trip.end());
    fine.prolongation.makeCompressed();
    if (opts_.interior_extension == InteriorExtension::harmonic) harmonic_interior(fine, n);
  }
  fine.restriction = fine.prolongation.transpose();
  fine.restriction.makeCompressed();
}

// ---------------------------------------------------------------------------
// Hierarchy

Hierarchy::Hierarchy(std::shared_ptr<const Mesh> fine_mesh, int fine_order, const ProblemSpec& spec,
                     MultigridOptions opts)
    : opts_(opts) {
  if (fine_order < 1) fail(ErrorCode::unsupported_order, "multigrid needs p >= 1");
  if (opts_.nu1 < 0 || opts_.nu2 < 0) fail(ErrorCode::invalid_argument, "smoothing steps must be >= 0");

  auto push = [&](std::shared_ptr<const Mesh> mesh, int p, MGLevel::Kind kind) {
    MGLevel lvl;
    lvl.kind = kind;
    lvl.disc = std::make_unique<Discretization>(std::move(mesh), p, spec, opts_.disc);
    levels_.push_back(std::move(lvl));
  };
  push(fine_mesh, fine_order, MGLevel::Kind::p_level);
  for (int p = fine_order - 1; p >= 1; --p) push(fine_mesh, p, MGLevel::Kind::p_level);
  std::shared_ptr<const Mesh> mesh = fine_mesh;
  while (mesh->nx() % 2 == 0 && mesh->ny() % 2 == 0) {
    auto coarse = std::make_shared<const Mesh>(coarsen(*mesh));
    if (coarse->num_interior_facets() == 0) break;
    levels_.back().kind = MGLevel::Kind::h_level;
    push(coarse, 1, MGLevel::Kind::h_level);
    levels_.back().continuous =
        opts_.h_space == HCoarseSpace::continuous && opts_.coarse_operator == CoarseOperator::galerkin;
    mesh = coarse;
  }
  levels_.back().kind = MGLevel::Kind::coarsest;
  if (levels_.back().size() > opts_.coarse_cap)
    fail(ErrorCode::configuration, "coarsest level has " + std::to_string(levels_.back().size()) +
                                       " unknowns, above the cap of " + std::to_string(opts_.coarse_cap));

  levels_.front().matrix = levels_.front().disc->csr();
  levels_.front().matrix_free = true;
  for (int l = 0; l + 1 < num_levels(); ++l) {
    build_transfer(l);
    MGLevel& c = levels_[l + 1];
    if (opts_.coarse_operator == CoarseOperator::galerkin) {
      c.matrix = CsrMatrix(levels_[l].restriction * levels_[l].matrix * levels_[l].prolongation);
      c.matrix.prune(0.0);
    } else {
      c.matrix = c.disc->csr();
    }
    c.matrix.makeCompressed();
    levels_[l].smoother = FsaiSmoother::build(levels_[l].matrix, opts_.fsai_power, opts_.omega, opts_.fsai_drop_tol);
    if (opts_.omega_bound > 0.0) {
      const double lam = levels_[l].smoother->estimate_lambda_max(levels_[l].matrix);
      if (opts_.omega * lam > opts_.omega_bound) levels_[l].smoother->set_omega(opts_.omega_bound / lam);
    }
  }
  if (levels_.back().size() > 0) {
    coarse_.compute(Eigen::SparseMatrix<double>(levels_.back().matrix));
    if (coarse_.info() != Eigen::Success) fail(ErrorCode::numerical_breakdown, "coarse factorisation failed");
  }
}

Eigen::VectorXd MGLevel::apply(const Eigen::VectorXd& x) const {
  if (matrix_free) return disc->op().apply(x);
  return matrix * x;
}

Eigen::VectorXd Hierarchy::coarse_solve(const Eigen::VectorXd& b) const {
  if (b.size() == 0) return b;
  return coarse_.solve(b);
}

Eigen::VectorXd Hierarchy::prolongate(int l, const Eigen::VectorXd& coarse) const {
  if (l < 0 || l + 1 >= num_levels()) fail(ErrorCode::invalid_argument, "levels are not adjacent");
  return levels_[l].prolongation * coarse;
}

Eigen::VectorXd Hierarchy::restrict_to_coarse(int l, const Eigen::VectorXd& fine) const {
  if (l < 0 || l + 1 >= num_levels()) fail(ErrorCode::invalid_argument, "levels are not adjacent");
  return levels_[l].restriction * fine;
}

Eigen::VectorXd Hierarchy::prolongate_solution(int l, const Eigen::VectorXd& coarse) const {
  Eigen::VectorXd y = prolongate(l, coarse);
  const MGLevel& fine = levels_[l];
  if (fine.interior_rows.empty()) return y;
  const Discretization& cd = *levels_[l + 1].disc;
  const int n = fine.order() + 1;
  for (const auto& row : fine.interior_rows) {
    const LocalSolution sol = cd.reconstruct_element(row.coarse_element, coarse);
    y.segment(row.fine_block * n, n) = row.basis_at_nodes * sol.u;
  }
  return y;
}

void Hierarchy::cycle(int l, const Eigen::VectorXd& b, Eigen::VectorXd& x, int gamma) const {
  if (l == num_levels() - 1) {
    x = coarse_solve(b);
    return;
  }
  const MGLevel& lvl = levels_[l];
  auto A = [&lvl](const Eigen::VectorXd& v) { return lvl.apply(v); };
  lvl.smoother->smooth(A, b, x, opts_.nu1);
  const Eigen::VectorXd r = b - lvl.apply(x);
  const Eigen::VectorXd rc = lvl.restriction * r;
  Eigen::VectorXd ec = Eigen::VectorXd::Zero(rc.size());
  const int visits = (l + 1 == num_levels() - 1) ? 1 : gamma;
  for (int g = 0; g < visits; ++g) cycle(l + 1, rc, ec, gamma);
  x += lvl.prolongation * ec;
  lvl.smoother->smooth(A, b, x, opts_.nu2);
}

Eigen::VectorXd Hierarchy::solve(CycleType type, const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                                 double rel_tol, int max_cycles, ConvergenceMonitor& monitor) const {
  if (type == CycleType::fmg) fail(ErrorCode::invalid_argument, "use fmg() for full multigrid");
  const TraceOperator& A = fine().op();
  const int gamma = type == CycleType::w ? 2 : 1;
  Eigen::VectorXd x = x0;
  const double bnorm = b.norm();
  monitor.record((b - A.apply(x)).norm());
  for (int k = 0; k < max_cycles; ++k) {
    if (monitor.history().back() <= rel_tol * bnorm) break;
    cycle(0, b, x, gamma);
    monitor.record((b - A.apply(x)).norm());
    if (monitor.diverged()) break;
  }
  return x;
}

Eigen::VectorXd Hierarchy::level_rhs(int l) const {
  if (l < 0 || l >= num_levels()) fail(ErrorCode::invalid_argument, "level out of range");
  if (opts_.coarse_operator == CoarseOperator::rediscretized) return levels_[l].disc->rhs();
  Eigen::VectorXd b = fine().rhs();
  for (int k = 0; k < l; ++k) b = levels_[k].restriction * b;
  return b;
}

FmgReport Hierarchy::fmg() const {
  const int L = num_levels();
  const bool galerkin = opts_.coarse_operator == CoarseOperator::galerkin;
  std::vector<Eigen::VectorXd> rhs(L);
  rhs[0] = fine().rhs();
  for (int l = 1; l < L; ++l) rhs[l] = galerkin ? Eigen::VectorXd(levels_[l - 1].restriction * rhs[l - 1])
                                              : levels_[l].disc->rhs();
  Eigen::VectorXd x = coarse_solve(rhs[L - 1]);
  for (int l = L - 2; l >= 0; --l) {
    x = galerkin ? prolongate(l, x) : prolongate_solution(l, x);
    cycle(l, rhs[l], x, 1);
  }
  FmgReport rep;
  const Discretization& d = fine();
  rep.x = x;
  rep.relative_residual = d.rhs().norm() > 0 ? (d.rhs() - d.op().apply(x)).norm() / d.rhs().norm() : 0.0;
  if (d.spec().has_exact()) {
    rep.fmg_error = d.errors(x, false);
    rep.direct_error = d.errors(d.solve_direct(), false);
  }
  return rep;
}

}  // namespace hdgmg
