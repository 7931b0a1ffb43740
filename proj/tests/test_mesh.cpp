#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <utility>

#include "lipbarrier/error.hpp"
#include "lipbarrier/mesh.hpp"

using namespace lipbarrier;

namespace {

std::vector<ExteriorBallDomain> shapes() {
  return {ExteriorBallDomain::disk(1.0), ExteriorBallDomain::ellipse(2.0, 1.0).placed(0.3, {1.0, -0.5}),
          ExteriorBallDomain::annulus(1.0, 2.0),
          ExteriorBallDomain::rounded_polygon({{-1.0, -0.5}, {1.0, -0.5}, {0.0, 1.0}}, 0.2)};
}

int euler_characteristic(const Mesh& m) {
  std::set<std::pair<int, int>> edges;
  for (Eigen::Index t = 0; t < m.triangle_count(); ++t) {
    for (int j = 0; j < 3; ++j) {
      const int a = m.F(t, j), b = m.F(t, (j + 1) % 3);
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return static_cast<int>(m.vertex_count()) - static_cast<int>(edges.size()) + static_cast<int>(m.triangle_count());
}

}  // namespace

TEST_CASE("meshes are conforming and fit the boundary") {
  for (const auto& dom : shapes()) {
    INFO(dom.shape_name());
    for (double h : {0.3, 0.1}) {
      const Mesh m = triangulate(dom, h);
      const MeshCheck c = check_mesh(m, dom);
      CHECK(c.ok());
      CHECK(c.min_area > 0.0);
      CHECK(m.h <= h);
      CHECK(c.max_boundary_offset <= 1e-10);
      // Inscribed polygonal boundary: area deficit of order h^2 times perimeter.
      CHECK(c.area <= dom.area() * (1.0 + 1e-12));
      CHECK(dom.area() - c.area <= h * h * dom.component_length(0));
      CHECK(euler_characteristic(m) == (dom.component_count() == 1 ? 1 : 0));
    }
  }
}

TEST_CASE("boundary flags match the components") {
  const auto dom = ExteriorBallDomain::annulus(1.0, 2.0);
  const Mesh m = triangulate(dom, 0.2);
  std::map<int, int> counts;
  for (Eigen::Index i = 0; i < m.vertex_count(); ++i) {
    CHECK(m.boundary[i] == (m.component[i] >= 0));
    ++counts[m.component[i]];
    if (m.component[i] == 0) CHECK(m.vertex(i).norm() == doctest::Approx(2.0));
    if (m.component[i] == 1) CHECK(m.vertex(i).norm() == doctest::Approx(1.0));
  }
  CHECK(counts[0] > counts[1]);
  CHECK(counts[-1] > 0);
}

TEST_CASE("meshing is deterministic") {
  const auto dom = ExteriorBallDomain::ellipse(2.0, 1.0);
  const Mesh a = triangulate(dom, 0.15);
  const Mesh b = triangulate(dom, 0.15);
  CHECK(a.V == b.V);
  CHECK(a.F == b.F);
}

TEST_CASE("placement maps meshes rigidly") {
  const auto base = ExteriorBallDomain::ellipse(2.0, 1.0);
  const auto moved = base.placed(0.8, {-1.0, 3.0});
  const Mesh a = triangulate(base, 0.2);
  const Mesh b = triangulate(moved, 0.2);
  REQUIRE(a.vertex_count() == b.vertex_count());
  CHECK(a.F == b.F);
  for (Eigen::Index i = 0; i < a.vertex_count(); ++i) CHECK((moved.to_global(a.vertex(i)) - b.vertex(i)).norm() < 1e-12);
}

TEST_CASE("invalid mesh sizes") {
  const auto dom = ExteriorBallDomain::disk(1.0);
  CHECK_THROWS_AS(triangulate(dom, 0.0), Error);
  CHECK_THROWS_AS(triangulate(dom, -1.0), Error);
}
