#include "shapeinst/scanplane.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

namespace shapeinst {

ScanPlane ScanPlane::from_normal(const Eigen::Vector3d& origin, const Eigen::Vector3d& normal) {
  const double len = normal.norm();
  if (!(len > 0.0)) throw Error(ErrorKind::degenerate_geometry, "plane normal has zero length");
  ScanPlane p;
  p.origin = origin;
  p.normal = normal / len;
  Eigen::Vector3d ax = Eigen::Vector3d::UnitX() - p.normal.x() * p.normal;
  if (ax.norm() < 1e-6) ax = Eigen::Vector3d::UnitY() - p.normal.y() * p.normal;
  p.axis_x = ax.normalized();
  p.axis_y = p.normal.cross(p.axis_x);
  return p;
}

double ScanPlane::frame_error() const {
  double e = 0.0;
  e = std::max(e, std::abs(axis_x.norm() - 1.0));
  e = std::max(e, std::abs(axis_y.norm() - 1.0));
  e = std::max(e, std::abs(normal.norm() - 1.0));
  e = std::max(e, std::abs(axis_x.dot(axis_y)));
  e = std::max(e, (axis_x.cross(axis_y) - normal).cwiseAbs().maxCoeff());
  return e;
}

PlaneFit fit_weighted_plane(const std::vector<Eigen::Vector3d>& points,
                            const std::vector<double>& weights) {
  if (points.size() != weights.size()) {
    throw Error(ErrorKind::structural, "fit_weighted_plane: " + std::to_string(points.size()) +
                                           " points but " + std::to_string(weights.size()) +
                                           " weights");
  }
  double wsum = 0.0;
  int positive = 0;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(weights[i] >= 0.0)) {
      throw Error(ErrorKind::structural, "fit_weighted_plane: negative or NaN weight");
    }
    if (weights[i] > 0.0) ++positive;
    wsum += weights[i];
    centroid += weights[i] * points[i];
  }
  if (positive < 3) {
    throw Error(ErrorKind::degenerate_geometry,
                "fit_weighted_plane: need at least 3 points with positive weight, got " +
                    std::to_string(positive));
  }
  centroid /= wsum;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector3d r = points[i] - centroid;
    cov += (weights[i] / wsum) * r * r.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Eigen::Vector3d ev = es.eigenvalues();
  if (ev(1) <= 1e-12 * std::max(ev(2), std::numeric_limits<double>::min())) {
    throw Error(ErrorKind::degenerate_geometry, "fit_weighted_plane: points are collinear");
  }
  Eigen::Vector3d normal = es.eigenvectors().col(0);
  Eigen::Index arg = 0;
  normal.cwiseAbs().maxCoeff(&arg);
  if (normal(arg) < 0.0) normal = -normal;

  PlaneFit fit;
  fit.plane = ScanPlane::from_normal(centroid, normal);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dist = fit.plane.signed_distance(points[i]);
    fit.weighted_sq_residual += weights[i] * dist * dist;
    fit.weighted_abs_residual += weights[i] * std::abs(dist);
  }
  return fit;
}

double weighted_sq_residual(const ScanPlane& plane, const std::vector<Eigen::Vector3d>& points,
                            const std::vector<double>& weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = plane.signed_distance(points[i]);
    acc += weights[i] * d * d;
  }
  return acc;
}

namespace {

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

void rotate_frame(ScanPlane& p, const Eigen::Vector3d& axis, double angle_deg) {
  const Eigen::Matrix3d r = Eigen::AngleAxisd(deg2rad(angle_deg), axis).toRotationMatrix();
  p.axis_x = r * p.axis_x;
  p.axis_y = r * p.axis_y;
  p.normal = r * p.normal;
}

}  // namespace

ScanPlane perturb_plane(const ScanPlane& p, const PlanePerturbation& d) {
  ScanPlane out = p;
  if (d.rot_x_deg == 0.0 && d.rot_y_deg == 0.0 && d.translate_z_mm == 0.0) return out;
  rotate_frame(out, out.axis_x, d.rot_x_deg);
  rotate_frame(out, out.axis_y, d.rot_y_deg);
  out.origin += d.translate_z_mm * out.normal;
  return out;
}

ScanPlane perturb_inverse(const ScanPlane& p, const PlanePerturbation& d) {
  ScanPlane out = p;
  out.origin -= d.translate_z_mm * out.normal;
  rotate_frame(out, out.axis_y, -d.rot_y_deg);
  rotate_frame(out, out.axis_x, -d.rot_x_deg);
  return out;
}

std::vector<PlanePerturbation> deviation_preset() {
  std::vector<PlanePerturbation> out{{0.0, 0.0, 0.0}};
  for (double v : {-6.0, -3.0, 3.0, 6.0}) out.push_back({v, 0.0, 0.0});
  for (double v : {-6.0, -3.0, 3.0, 6.0}) out.push_back({0.0, v, 0.0});
  for (double v : {-6.0, -3.0, 3.0, 6.0}) out.push_back({0.0, 0.0, v});
  return out;
}

}  // namespace shapeinst
