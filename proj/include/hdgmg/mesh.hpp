#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace hdgmg {

struct Rectangle {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  double area() const { return (x1 - x0) * (y1 - y0); }
};

/// Local facet order on every element.
enum Side : int { bottom = 0, right = 1, top = 2, left = 3 };
inline constexpr int kSidesPerElement = 4;

enum class Axis { horizontal, vertical };

struct Element {
  int ix = 0, iy = 0;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  double dx() const { return x1 - x0; }
  double dy() const { return y1 - y0; }
};

struct FacetOwner {
  int element = -1;
  int side = -1;
};

struct Facet {
  Axis axis = Axis::horizontal;
  // Endpoints ordered along increasing x (horizontal) or y (vertical).
  double xa = 0, ya = 0, xb = 0, yb = 0;
  bool boundary = false;
  int owner_count = 0;
  std::array<FacetOwner, 2> owners{};  // lower/left element first
  double length() const { return axis == Axis::horizontal ? xb - xa : yb - ya; }
};

/// Outward unit normal of local side `s`.
std::array<double, 2> outward_normal(int side);

/// Cartesian quadrilateral mesh with facet skeleton.
///
/// Facets are numbered lexicographically: all horizontal rows bottom-up
/// (row j holds facets j*nx .. j*nx+nx-1), then all vertical columns
/// left-right (column i holds nx*(ny+1) + i*ny .. + ny-1).
/// Every facet is parametrised in the direction of increasing x or y, which is
/// also the direction used by both owner elements, so no orientation flips
/// are needed between neighbours.
class Mesh {
 public:
  Mesh() = default;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const Rectangle& domain() const { return domain_; }

  std::size_t num_elements() const { return elements_.size(); }
  std::size_t num_facets() const { return facets_.size(); }
  std::size_t num_interior_facets() const { return interior_count_; }

  const Element& element(int e) const { return elements_[e]; }
  const Facet& facet(int f) const { return facets_[f]; }
  const std::array<int, 4>& element_facets(int e) const { return elem_to_facets_[e]; }

  int element_id(int ix, int iy) const { return iy * nx_ + ix; }
  int horizontal_facet(int ix, int jrow) const { return jrow * nx_ + ix; }
  int vertical_facet(int icol, int iy) const { return nx_ * (ny_ + 1) + icol * ny_ + iy; }

  /// Children (in the finer mesh this one was coarsened from), ordered
  /// bottom-left, bottom-right, top-left, top-right. Empty unless produced by coarsen().
  const std::vector<std::array<int, 4>>& children() const { return children_; }

  friend Mesh build_cartesian(int nx, int ny, const Rectangle& domain);

 private:
  int nx_ = 0, ny_ = 0;
  Rectangle domain_{};
  std::vector<Element> elements_;
  std::vector<Facet> facets_;
  std::vector<std::array<int, 4>> elem_to_facets_;
  std::size_t interior_count_ = 0;
  std::vector<std::array<int, 4>> children_;

  friend Mesh coarsen(const Mesh& fine);
};

Mesh build_cartesian(int nx, int ny, const Rectangle& domain = {});

/// Halves the element count per axis. Throws cannot_coarsen on odd counts.
Mesh coarsen(const Mesh& fine);

/// Debug dump: an element table followed by a facet table.
void write_mesh_csv(const Mesh& mesh, std::ostream& os);

}  // namespace hdgmg
