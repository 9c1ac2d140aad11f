#include "hdgmg/mesh.hpp"

#include <ostream>
#include <string>

#include "hdgmg/error.hpp"

namespace hdgmg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::cannot_coarsen: return "cannot-coarsen";
    case ErrorCode::numerical_breakdown: return "numerical-breakdown";
    case ErrorCode::unsupported_order: return "unsupported-order";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::configuration: return "configuration";
  }
  return "unknown";
}

std::array<double, 2> outward_normal(int side) {
  switch (side) {
    case bottom: return {0.0, -1.0};
    case right: return {1.0, 0.0};
    case top: return {0.0, 1.0};
    case left: return {-1.0, 0.0};
    default: fail(ErrorCode::invalid_argument, "side index out of range");
  }
}

Mesh build_cartesian(int nx, int ny, const Rectangle& domain) {
  if (nx < 1 || ny < 1)
    fail(ErrorCode::invalid_argument,
         "element counts must be positive, got " + std::to_string(nx) + "x" + std::to_string(ny));
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0))
    fail(ErrorCode::invalid_argument, "domain must have positive area");

  Mesh m;
  m.nx_ = nx;
  m.ny_ = ny;
  m.domain_ = domain;
  const double hx = (domain.x1 - domain.x0) / nx;
  const double hy = (domain.y1 - domain.y0) / ny;
  auto xc = [&](int i) { return i == nx ? domain.x1 : domain.x0 + i * hx; };
  auto yc = [&](int j) { return j == ny ? domain.y1 : domain.y0 + j * hy; };

  m.elements_.resize(static_cast<std::size_t>(nx) * ny);
  m.elem_to_facets_.resize(m.elements_.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int e = m.element_id(i, j);
      m.elements_[e] = Element{i, j, xc(i), xc(i + 1), yc(j), yc(j + 1)};
      m.elem_to_facets_[e] = {m.horizontal_facet(i, j), m.vertical_facet(i + 1, j),
                              m.horizontal_facet(i, j + 1), m.vertical_facet(i, j)};
    }

  m.facets_.resize(static_cast<std::size_t>(nx) * (ny + 1) + static_cast<std::size_t>(ny) * (nx + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Facet& f = m.facets_[m.horizontal_facet(i, j)];
      f.axis = Axis::horizontal;
      f.xa = xc(i);
      f.xb = xc(i + 1);
      f.ya = f.yb = yc(j);
      if (j > 0) f.owners[f.owner_count++] = {m.element_id(i, j - 1), top};
      if (j < ny) f.owners[f.owner_count++] = {m.element_id(i, j), bottom};
      f.boundary = f.owner_count == 1;
    }
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j < ny; ++j) {
      Facet& f = m.facets_[m.vertical_facet(i, j)];
      f.axis = Axis::vertical;
      f.xa = f.xb = xc(i);
      f.ya = yc(j);
      f.yb = yc(j + 1);
      if (i > 0) f.owners[f.owner_count++] = {m.element_id(i - 1, j), right};
      if (i < nx) f.owners[f.owner_count++] = {m.element_id(i, j), left};
      f.boundary = f.owner_count == 1;
    }
  for (const Facet& f : m.facets_)
    if (!f.boundary) ++m.interior_count_;
  return m;
}

Mesh coarsen(const Mesh& fine) {
  if (fine.nx() % 2 != 0 || fine.ny() % 2 != 0)
    fail(ErrorCode::cannot_coarsen, "cannot coarsen a " + std::to_string(fine.nx()) + "x" +
                                        std::to_string(fine.ny()) + " mesh: counts must be even");
  Mesh coarse = build_cartesian(fine.nx() / 2, fine.ny() / 2, fine.domain());
  coarse.children_.resize(coarse.num_elements());
  for (int j = 0; j < coarse.ny(); ++j)
    for (int i = 0; i < coarse.nx(); ++i)
      coarse.children_[coarse.element_id(i, j)] = {
          fine.element_id(2 * i, 2 * j), fine.element_id(2 * i + 1, 2 * j),
          fine.element_id(2 * i, 2 * j + 1), fine.element_id(2 * i + 1, 2 * j + 1)};
  return coarse;
}

void write_mesh_csv(const Mesh& mesh, std::ostream& os) {
  os << "element,x0,y0,x1,y1\n";
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Element& el = mesh.element(static_cast<int>(e));
    os << e << ',' << el.x0 << ',' << el.y0 << ',' << el.x1 << ',' << el.y1 << '\n';
  }
  os << "facet,xa,ya,xb,yb,boundary,owner0,owner1\n";
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const Facet& fa = mesh.facet(static_cast<int>(f));
    os << f << ',' << fa.xa << ',' << fa.ya << ',' << fa.xb << ',' << fa.yb << ','
       << (fa.boundary ? 1 : 0) << ',' << fa.owners[0].element << ','
       << (fa.owner_count > 1 ? fa.owners[1].element : -1) << '\n';
  }
}

}  // namespace hdgmg
