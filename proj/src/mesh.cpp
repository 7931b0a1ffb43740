#include "lipbarrier/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "lipbarrier/error.hpp"
#include "lipbarrier/numerics.hpp"

namespace lipbarrier {

double Mesh::signed_area(Eigen::Index t) const {
  const Point a = vertex(F(t, 0));
  const Point b = vertex(F(t, 1));
  const Point c = vertex(F(t, 2));
  const Point e1 = b - a;
  const Point e2 = c - a;
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

namespace {

struct Builder {
  std::vector<Point> points;
  std::vector<int> component;
  std::vector<double> arc;
  std::vector<std::array<int, 3>> triangles;

  int add(const Point& p, int comp = -1, double s = 0.0) {
    points.push_back(p);
    component.push_back(comp);
    arc.push_back(s);
    return static_cast<int>(points.size()) - 1;
  }

  void triangle(int a, int b, int c) {
    const Point e1 = points[b] - points[a];
    const Point e2 = points[c] - points[a];
    if (e1.x() * e2.y() - e1.y() * e2.x() < 0.0) std::swap(b, c);
    triangles.push_back({a, b, c});
  }

  // Stitches two closed rings whose nodes are equispaced in a shared
  // periodic parameter.
  void zip(const std::vector<int>& inner, const std::vector<int>& outer) {
    const auto na = inner.size();
    const auto nb = outer.size();
    std::size_t i = 0;
    std::size_t o = 0;
    while (i < na || o < nb) {
      const double ti = static_cast<double>(i + 1) / na;
      const double to = static_cast<double>(o + 1) / nb;
      if (o >= nb || (i < na && ti < to)) {
        triangle(inner[i % na], inner[(i + 1) % na], outer[o % nb]);
        ++i;
      } else {
        triangle(inner[i % na], outer[(o + 1) % nb], outer[o % nb]);
        ++o;
      }
    }
  }

  void fan(int center, const std::vector<int>& ring) {
    for (std::size_t k = 0; k < ring.size(); ++k) triangle(center, ring[k], ring[(k + 1) % ring.size()]);
  }

  Mesh finish() const {
    Mesh m;
    m.V.resize(static_cast<Eigen::Index>(points.size()), 2);
    for (std::size_t i = 0; i < points.size(); ++i) m.V.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
    m.F.resize(static_cast<Eigen::Index>(triangles.size()), 3);
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      for (int j = 0; j < 3; ++j) m.F(static_cast<Eigen::Index>(t), j) = triangles[t][j];
    }
    m.component = component;
    m.arc = arc;
    m.boundary.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) m.boundary[i] = component[i] >= 0;
    for (const auto& tri : triangles) {
      for (int j = 0; j < 3; ++j) m.h = std::max(m.h, (points[tri[j]] - points[tri[(j + 1) % 3]]).norm());
    }
    return m;
  }
};

int ring_size(double length, double spacing) {
  return std::max(3, static_cast<int>(std::ceil(length / spacing)));
}

Mesh star_mesh(const ExteriorBallDomain& dom, double spacing) {
  const Point c = dom.star_center();
  const double perimeter = dom.component_length(0);
  double reach = 0.0;
  for (const auto& p : dom.sample_boundary(64.0)) reach = std::max(reach, (p.x - c).norm());
  const int rings = std::max(1, static_cast<int>(std::ceil(reach / spacing)));

  Builder b;
  const int center = b.add(c);
  std::vector<int> previous;
  for (int j = 1; j <= rings; ++j) {
    const double rho = static_cast<double>(j) / rings;
    const int n = ring_size(rho * perimeter, spacing);
    std::vector<int> ring;
    for (int k = 0; k < n; ++k) {
      const double s = perimeter * k / n;
      const BoundaryPoint bp = dom.boundary_point(0, s);
      ring.push_back(j == rings ? b.add(bp.x, 0, bp.s) : b.add(c + rho * (bp.x - c)));
    }
    if (j == 1) b.fan(center, ring); else b.zip(previous, ring);
    previous = std::move(ring);
  }
  return b.finish();
}

Mesh annulus_mesh(const ExteriorBallDomain& dom, double spacing) {
  const double r_in = dom.parameters()[0];
  const double r_out = dom.parameters()[1];
  const int rings = std::max(1, static_cast<int>(std::ceil((r_out - r_in) / spacing)));
  Builder b;
  std::vector<int> previous;
  for (int j = 0; j <= rings; ++j) {
    const double r = r_in + (r_out - r_in) * j / rings;
    const int n = ring_size(2.0 * std::numbers::pi * r, spacing);
    std::vector<int> ring;
    for (int k = 0; k < n; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / n;
      if (j == 0) {
        const BoundaryPoint bp = dom.boundary_point(1, -theta * r_in);
        ring.push_back(b.add(bp.x, 1, bp.s));
      } else if (j == rings) {
        const BoundaryPoint bp = dom.boundary_point(0, theta * r_out);
        ring.push_back(b.add(bp.x, 0, bp.s));
      } else {
        ring.push_back(b.add(dom.to_global(Point(r * std::cos(theta), r * std::sin(theta)))));
      }
    }
    if (j > 0) b.zip(previous, ring);
    previous = std::move(ring);
  }
  return b.finish();
}

}  // namespace

Mesh triangulate(const ExteriorBallDomain& dom, double h_target) {
  if (!(h_target > 0.0) || !std::isfinite(h_target)) fail(ErrorKind::meshing, "mesh size must be positive and finite");
  double spacing = 0.6 * h_target;
  for (int attempt = 0; attempt < 60; ++attempt) {
    Mesh m = dom.kind() == ShapeKind::annulus ? annulus_mesh(dom, spacing) : star_mesh(dom, spacing);
    if (m.h <= h_target) return m;
    spacing *= 0.9;
  }
  fail(ErrorKind::meshing, "could not reach mesh size " + format_double(h_target));
}

MeshCheck check_mesh(const Mesh& mesh, const ExteriorBallDomain& dom) {
  MeshCheck out;
  out.min_area = std::numeric_limits<double>::infinity();
  std::map<std::pair<int, int>, int> edges;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const double a = mesh.signed_area(t);
    out.min_area = std::min(out.min_area, a);
    out.area += a;
    for (int j = 0; j < 3; ++j) {
      const int u = mesh.F(t, j);
      const int v = mesh.F(t, (j + 1) % 3);
      ++edges[{std::min(u, v), std::max(u, v)}];
    }
  }
  out.positive_areas = out.min_area > 0.0;
  out.conforming = true;
  for (const auto& [edge, count] : edges) {
    const bool on_boundary = mesh.boundary[edge.first] && mesh.boundary[edge.second];
    if (count > 2 || (count == 1 && !on_boundary)) out.conforming = false;
  }
  for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
    if (!mesh.boundary[i]) continue;
    const BoundaryPoint bp = dom.boundary_point(mesh.component[i], mesh.arc[i]);
    out.max_boundary_offset = std::max(out.max_boundary_offset, (bp.x - mesh.vertex(i)).norm());
  }
  out.boundary_on_curve = out.max_boundary_offset <= 1e-10;
  return out;
}

}  // namespace lipbarrier
