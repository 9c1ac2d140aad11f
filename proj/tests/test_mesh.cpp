#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "hdgmg/error.hpp"
#include "hdgmg/mesh.hpp"

using namespace hdgmg;

TEST_CASE("mesh: single element has four boundary facets") {
  const Mesh m = build_cartesian(1, 1);
  CHECK(m.num_elements() == 1);
  CHECK(m.num_facets() == 4);
  CHECK(m.num_interior_facets() == 0);
  for (int f = 0; f < 4; ++f) CHECK(m.facet(f).boundary);
}

TEST_CASE("mesh: 2x2 counts") {
  const Mesh m = build_cartesian(2, 2);
  CHECK(m.num_elements() == 4);
  CHECK(m.num_facets() == 12);
  CHECK(m.num_interior_facets() == 4);
}

TEST_CASE("mesh: 16x16 counts match 2N(N+1)") {
  const Mesh m = build_cartesian(16, 16);
  CHECK(m.num_elements() == 256);
  CHECK(m.num_facets() == 544);
  CHECK(m.num_interior_facets() == 2 * 16 * 15);
}

TEST_CASE("mesh: rectangular counts and numbering") {
  const Mesh m = build_cartesian(3, 2);
  CHECK(m.num_facets() == 3 * 3 + 4 * 2);
  CHECK(m.horizontal_facet(2, 1) == 5);
  CHECK(m.vertical_facet(0, 0) == 9);
  CHECK(m.vertical_facet(3, 1) == 9 + 3 * 2 + 1);
  CHECK(m.facet(m.horizontal_facet(1, 0)).axis == Axis::horizontal);
  CHECK(m.facet(m.vertical_facet(1, 0)).axis == Axis::vertical);
}

TEST_CASE("mesh: rejects non-positive counts and empty domains") {
  CHECK_THROWS_AS(build_cartesian(0, 4), Error);
  CHECK_THROWS_AS(build_cartesian(4, -1), Error);
  CHECK_THROWS_AS(build_cartesian(2, 2, Rectangle{0, 0, 0, 1}), Error);
  try {
    build_cartesian(0, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }
}

TEST_CASE("mesh: incidence and owner invariants") {
  const Mesh m = build_cartesian(5, 4, Rectangle{-1.0, 2.0, 0.5, 1.5});
  std::set<int> seen;
  int boundary = 0;
  for (std::size_t f = 0; f < m.num_facets(); ++f) {
    const Facet& fc = m.facet(static_cast<int>(f));
    CHECK(fc.owner_count == (fc.boundary ? 1 : 2));
    boundary += fc.boundary;
    for (int o = 0; o < fc.owner_count; ++o) {
      const auto& ow = fc.owners[o];
      CHECK(m.element_facets(ow.element)[ow.side] == static_cast<int>(f));
    }
    if (fc.owner_count == 2) {
      // lower/left owner sees the facet as its top/right side
      CHECK((fc.owners[0].side == top || fc.owners[0].side == right));
      CHECK(fc.owners[1].side == (fc.owners[0].side + 2) % 4);
    }
  }
  CHECK(boundary == 2 * (5 + 4));
  CHECK(m.num_interior_facets() == m.num_facets() - boundary);
  double area = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const Element& el = m.element(static_cast<int>(e));
    area += el.dx() * el.dy();
    for (int f : m.element_facets(static_cast<int>(e))) seen.insert(f);
  }
  CHECK(area == doctest::Approx(m.domain().area()).epsilon(1e-13));
  CHECK(seen.size() == m.num_facets());
}

TEST_CASE("mesh: facet geometry follows the element") {
  const Mesh m = build_cartesian(4, 4);
  const Element& el = m.element(m.element_id(2, 1));
  const auto& fs = m.element_facets(m.element_id(2, 1));
  CHECK(m.facet(fs[bottom]).ya == doctest::Approx(el.y0));
  CHECK(m.facet(fs[top]).yb == doctest::Approx(el.y1));
  CHECK(m.facet(fs[left]).xa == doctest::Approx(el.x0));
  CHECK(m.facet(fs[right]).xb == doctest::Approx(el.x1));
  CHECK(m.facet(fs[bottom]).length() == doctest::Approx(0.25));
}

TEST_CASE("mesh: outward normals are unit and opposite in pairs") {
  for (int s = 0; s < 4; ++s) {
    const auto n = outward_normal(s);
    const auto o = outward_normal((s + 2) % 4);
    CHECK(std::hypot(n[0], n[1]) == doctest::Approx(1.0));
    CHECK(n[0] == -o[0]);
    CHECK(n[1] == -o[1]);
  }
  CHECK(outward_normal(bottom)[1] == -1.0);
  CHECK(outward_normal(right)[0] == 1.0);
  CHECK_THROWS_AS(outward_normal(4), Error);
}

TEST_CASE("mesh: coarsening 16 -> 8 with four children each") {
  const Mesh fine = build_cartesian(16, 16);
  const Mesh coarse = coarsen(fine);
  CHECK(coarse.nx() == 8);
  CHECK(coarse.ny() == 8);
  REQUIRE(coarse.children().size() == coarse.num_elements());
  std::set<int> all;
  for (std::size_t e = 0; e < coarse.num_elements(); ++e) {
    const Element& ce = coarse.element(static_cast<int>(e));
    double area = 0.0;
    for (int c : coarse.children()[e]) {
      const Element& fe = fine.element(c);
      CHECK(fe.x0 >= ce.x0 - 1e-15);
      CHECK(fe.x1 <= ce.x1 + 1e-15);
      CHECK(fe.y0 >= ce.y0 - 1e-15);
      CHECK(fe.y1 <= ce.y1 + 1e-15);
      area += fe.dx() * fe.dy();
      all.insert(c);
    }
    CHECK(area == doctest::Approx(ce.dx() * ce.dy()));
  }
  CHECK(all.size() == fine.num_elements());
  const auto& ch = coarse.children()[coarse.element_id(3, 2)];
  CHECK(ch[0] == fine.element_id(6, 4));
  CHECK(ch[1] == fine.element_id(7, 4));
  CHECK(ch[2] == fine.element_id(6, 5));
  CHECK(ch[3] == fine.element_id(7, 5));
}

TEST_CASE("mesh: coarsening limits") {
  const Mesh one = coarsen(build_cartesian(2, 2));
  CHECK(one.num_elements() == 1);
  CHECK(one.num_interior_facets() == 0);
  try {
    coarsen(build_cartesian(3, 3));
    FAIL("expected cannot_coarsen");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::cannot_coarsen);
  }
  CHECK_THROWS_AS(coarsen(one), Error);
}

TEST_CASE("mesh: csv dump lists every element and facet") {
  const Mesh m = build_cartesian(2, 3);
  std::ostringstream os;
  write_mesh_csv(m, os);
  const std::string s = os.str();
  int lines = 0;
  for (char c : s) lines += c == '\n';
  CHECK(lines >= static_cast<int>(m.num_elements() + m.num_facets()));
}
