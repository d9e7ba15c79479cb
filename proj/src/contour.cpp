#include "shapeinst/scanplane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace shapeinst {

namespace {

// Position at arc length `s` along the polyline `pts` (cumulative lengths in
// `cum`, cum[0] = 0). `hint` carries the segment index between calls.
Eigen::Vector2d point_at(const std::vector<Eigen::Vector2d>& pts, const std::vector<double>& cum,
                         double s, std::size_t& hint) {
  while (hint + 2 < cum.size() && cum[hint + 1] < s) ++hint;
  const double seg = cum[hint + 1] - cum[hint];
  const double t = seg > 0.0 ? std::clamp((s - cum[hint]) / seg, 0.0, 1.0) : 0.0;
  return pts[hint] + t * (pts[hint + 1] - pts[hint]);
}

}  // namespace

PlanarContour resample_contour(const PlanarContour& c, Eigen::Index num_points) {
  const Eigen::Index m = c.vertices.rows();
  if (c.closed && num_points < 3) {
    throw Error(ErrorKind::spec, "resample_contour: closed contours need at least 3 points, got " +
                                     std::to_string(num_points));
  }
  if (!c.closed && num_points < 2) {
    throw Error(ErrorKind::spec, "resample_contour: open contours need at least 2 points");
  }
  if (m < 2) throw Error(ErrorKind::degenerate_geometry, "resample_contour: fewer than 2 vertices");

  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(m) + 1);
  Eigen::Index anchor = 0;
  if (c.closed) {
    const double extent = std::max(1.0, c.vertices.cwiseAbs().maxCoeff());
    const double max_x = c.vertices.col(0).maxCoeff();
    double best_y = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (c.vertices(i, 0) >= max_x - 1e-9 * extent && c.vertices(i, 1) > best_y) {
        best_y = c.vertices(i, 1);
        anchor = i;
      }
    }
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    pts.emplace_back(c.vertices.row((anchor + k) % m).transpose());
  }
  if (c.closed) pts.push_back(pts.front());

  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  const double total = cum.back();
  if (!(total > 0.0)) throw Error(ErrorKind::degenerate_geometry, "resample_contour: zero length");

  PlanarContour out;
  out.closed = c.closed;
  out.vertices.resize(num_points, 2);
  const double step = c.closed ? total / static_cast<double>(num_points)
                               : total / static_cast<double>(num_points - 1);
  std::size_t hint = 0;
  for (Eigen::Index k = 0; k < num_points; ++k) {
    const double s = (!c.closed && k == num_points - 1) ? total : step * static_cast<double>(k);
    out.vertices.row(k) = point_at(pts, cum, s, hint).transpose();
  }
  return out;
}

}  // namespace shapeinst
