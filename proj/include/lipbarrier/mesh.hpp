#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lipbarrier/geometry.hpp"

namespace lipbarrier {

/// Conforming P1 triangulation: V holds one vertex per row, F one
/// counterclockwise triangle per row.
struct Mesh {
  Eigen::MatrixX2d V;
  Eigen::MatrixX3i F;
  std::vector<bool> boundary;        ///< per vertex
  std::vector<int> component;        ///< boundary component, -1 inside
  std::vector<double> arc;           ///< boundary arc parameter, 0 inside
  double h = 0.0;                    ///< longest edge

  Eigen::Index vertex_count() const { return V.rows(); }
  Eigen::Index triangle_count() const { return F.rows(); }
  Point vertex(Eigen::Index i) const { return V.row(i).transpose(); }
  double signed_area(Eigen::Index t) const;
};

/// Ring-stitched mesh of a star-shaped domain (or an annulus) with longest
/// edge at most h_target. Deterministic for fixed inputs.
Mesh triangulate(const ExteriorBallDomain& dom, double h_target);

struct MeshCheck {
  bool conforming = false;        ///< every interior edge shared by exactly two triangles
  bool positive_areas = false;
  bool boundary_on_curve = false;
  double min_area = 0.0;
  double max_boundary_offset = 0.0;
  double area = 0.0;

  bool ok() const { return conforming && positive_areas && boundary_on_curve; }
};

MeshCheck check_mesh(const Mesh& mesh, const ExteriorBallDomain& dom);

}  // namespace lipbarrier
