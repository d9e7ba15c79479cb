#pragma once

#include <vector>

#include <Eigen/Dense>

#include "shapeinst/kernels.hpp"
#include "shapeinst/ssm.hpp"

namespace shapeinst {

/// Oriented plane with a right-handed in-plane frame; normal = axis_x x axis_y.
struct ScanPlane {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis_x = Eigen::Vector3d::UnitX();
  Eigen::Vector3d axis_y = Eigen::Vector3d::UnitY();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();

  /// Builds the frame from an origin and normal. axis_x is the global x axis
  /// projected onto the plane, or global y when x is (nearly) normal to it.
  static ScanPlane from_normal(const Eigen::Vector3d& origin, const Eigen::Vector3d& normal);

  double signed_distance(const Eigen::Vector3d& p) const { return normal.dot(p - origin); }
  Eigen::Vector2d to_plane(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d r = p - origin;
    return {axis_x.dot(r), axis_y.dot(r)};
  }
  Eigen::Vector3d to_world(const Eigen::Vector2d& q) const {
    return origin + q.x() * axis_x + q.y() * axis_y;
  }
  /// Max deviation of {axis_x, axis_y, normal} from a right-handed orthonormal triad.
  double frame_error() const;
};

struct PlaneFit {
  ScanPlane plane;
  double weighted_sq_residual = 0.0;   // sum w_i d_i^2, the minimized objective
  double weighted_abs_residual = 0.0;  // sum w_i |d_i|, reported alongside
};

/// Weighted total-least-squares plane: through the weighted centroid, normal
/// along the smallest-eigenvalue direction of the weighted covariance. The
/// normal is signed so its largest-magnitude component is positive.
PlaneFit fit_weighted_plane(const std::vector<Eigen::Vector3d>& points,
                            const std::vector<double>& weights);

double weighted_sq_residual(const ScanPlane& plane, const std::vector<Eigen::Vector3d>& points,
                            const std::vector<double>& weights);

/// Rotations about the plane's own in-plane axes (degrees) then a shift along
/// the resulting normal (mm). Rotations are right-handed.
struct PlanePerturbation {
  double rot_x_deg = 0.0;
  double rot_y_deg = 0.0;
  double translate_z_mm = 0.0;
};

/// Rotate about axis_x, then about the rotated axis_y, both through the
/// origin; then translate along the rotated normal.
ScanPlane perturb_plane(const ScanPlane& p, const PlanePerturbation& d);
/// Undoes perturb_plane(p, d): perturb_inverse(perturb_plane(p, d), d) == p.
ScanPlane perturb_inverse(const ScanPlane& p, const PlanePerturbation& d);

/// The 13-plane deviation pattern: the unperturbed plane plus +-3 and +-6 on
/// each of rot_x, rot_y and translate_z in turn.
std::vector<PlanePerturbation> deviation_preset();

struct PlanarContour {
  Frame2 vertices;
  bool closed = true;

  double perimeter() const;
  double signed_area() const;
};

struct SliceResult {
  PlanarContour contour;
  int loops_found = 0;
  int loops_discarded = 0;
};

/// Intersects every triangle with the plane, chains segments through shared
/// mesh edges, keeps the longest loop, and returns it counter-clockwise in
/// (axis_x, axis_y) coordinates. Vertices lying exactly on the plane count as
/// being on the positive side.
SliceResult slice_mesh(const Frame3& vertices, const std::vector<Triangle>& triangles,
                       const ScanPlane& plane);

/// num_points samples equally spaced by arc length. Closed contours start at
/// the vertex of maximal x (ties: maximal y) and keep their orientation; open
/// contours include both end points.
PlanarContour resample_contour(const PlanarContour& c, Eigen::Index num_points);

/// Slices and resamples every frame with the same plane. Errors name the frame.
ContourSequence2D build_contour_sequence(const ShapeSequence3D& seq, const ScanPlane& plane,
                                         Eigen::Index num_points,
                                         Execution ex = Execution::parallel);

}  // namespace shapeinst
