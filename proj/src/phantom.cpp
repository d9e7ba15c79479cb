#include "shapeinst/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace shapeinst {

namespace {

constexpr double kPi = std::numbers::pi;

struct SphereMesh {
  std::vector<Eigen::Vector3d> dirs;
  std::vector<Triangle> triangles;
};

struct RingLayout {
  int rings = 0;
  int segments = 0;
};

// Even ring counts keep every vertex off the equatorial plane, so slices at
// z = 0 never pass exactly through a vertex.
RingLayout ring_layout(int requested) {
  const double m = std::max(0.0, (requested - 2) / 2.0);
  int rings = std::max(2, static_cast<int>(std::lround(std::sqrt(m))));
  if (rings % 2 == 1) {
    const double lo = rings - 1, hi = rings + 1;
    rings = (rings > 1 && std::abs(lo * lo - m) <= std::abs(hi * hi - m)) ? rings - 1 : rings + 1;
    rings = std::max(rings, 2);
  }
  const int segments =
      std::max(3, static_cast<int>(std::lround(static_cast<double>(requested - 2) / rings)));
  return {rings, segments};
}

SphereMesh uv_sphere(int requested) {
  const auto [rings, segments] = ring_layout(requested);
  SphereMesh m;
  m.dirs.reserve(static_cast<std::size_t>(2 + rings * segments));
  m.dirs.emplace_back(0.0, 0.0, 1.0);
  for (int j = 1; j <= rings; ++j) {
    const double theta = kPi * j / (rings + 1);
    for (int k = 0; k < segments; ++k) {
      const double phi = 2.0 * kPi * k / segments;
      m.dirs.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                          std::cos(theta));
    }
  }
  m.dirs.emplace_back(0.0, 0.0, -1.0);
  const int bottom = 1 + rings * segments;
  auto at = [segments = segments](int ring, int k) { return 1 + ring * segments + k % segments; };

  // Outward orientation throughout.
  for (int k = 0; k < segments; ++k) m.triangles.push_back({0, at(0, k), at(0, k + 1)});
  for (int j = 0; j + 1 < rings; ++j) {
    for (int k = 0; k < segments; ++k) {
      const int a = at(j, k), b = at(j, k + 1), c = at(j + 1, k), d = at(j + 1, k + 1);
      m.triangles.push_back({a, c, b});
      m.triangles.push_back({b, c, d});
    }
  }
  for (int k = 0; k < segments; ++k) {
    m.triangles.push_back({bottom, at(rings - 1, k + 1), at(rings - 1, k)});
  }
  return m;
}

// Low-order harmonics, each bounded by 1 in magnitude on the unit sphere.
constexpr int kNumBumps = 7;

std::array<double, kNumBumps> bump_basis(const Eigen::Vector3d& u) {
  return {2.0 * u.x() * u.y(),
          2.0 * u.y() * u.z(),
          2.0 * u.x() * u.z(),
          u.x() * u.x() - u.y() * u.y(),
          0.5 * (3.0 * u.z() * u.z() - 1.0),
          u.x() * (u.x() * u.x() - 3.0 * u.y() * u.y()),
          u.z() * (5.0 * u.z() * u.z() - 3.0) / 2.0};
}

class Field {
 public:
  explicit Field(const PhantomSpec& spec) : spec_(spec), band_(spec.band_normal.normalized()) {
    if (spec.base == BaseShape::bumpy_ellipsoid) {
      std::mt19937_64 rng(spec.seed);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      double total = 0.0;
      for (auto& c : coeffs_) {
        c = unit(rng);
        total += std::abs(c);
      }
      if (total > 0.0) {
        for (auto& c : coeffs_) c /= total;
      }
    }
  }

  double base_radius(const Eigen::Vector3d& u) const {
    const auto& a = spec_.semi_axes;
    const double inv = u.x() * u.x() / (a.x() * a.x()) + u.y() * u.y() / (a.y() * a.y()) +
                       u.z() * u.z() / (a.z() * a.z());
    double r = 1.0 / std::sqrt(inv);
    if (spec_.base == BaseShape::bumpy_ellipsoid) {
      const auto f = bump_basis(u);
      double b = 0.0;
      for (int i = 0; i < kNumBumps; ++i) b += coeffs_[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
      r *= 1.0 + spec_.bump_scale * b;
    }
    return r;
  }

  // 0 inside the band, 1 on the polar caps, smooth in between.
  double cap_blend(const Eigen::Vector3d& u) const {
    const double h = std::abs(u.dot(band_));
    const double x = std::clamp((h - spec_.band_width) / (spec_.cap_start - spec_.band_width), 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
  }

  // Mixing angle between the band pattern cos(pi s) and the cap pattern
  // cos(2 pi s): 0 in the band, +-pi/3 on the caps, odd across the band so
  // the band pattern is the dominant mode of the whole surface.
  double mix_angle(const Eigen::Vector3d& u) const {
    return (u.dot(band_) >= 0.0 ? 1.0 : -1.0) * (kPi / 3.0) * cap_blend(u);
  }

  double weight(const Eigen::Vector3d& u) const {
    return 1.0 - (1.0 - spec_.motion_floor) * cap_blend(u);
  }

  // Radius along u at phase s; only meaningful for the radial modes.
  double radius(const Eigen::Vector3d& u, double s) const {
    const double r0 = base_radius(u);
    const double a = spec_.amplitude;
    if (a == 0.0) return r0;
    switch (spec_.deformation) {
      case Deformation::linear_stretch:
        return r0 + a * s * weight(u);
      case Deformation::sinusoidal_radial: {
        const double m = mix_angle(u);
        return r0 + a * weight(u) *
                        (std::cos(m) * std::cos(kPi * s + spec_.phase) +
                         std::sin(m) * std::cos(2.0 * kPi * s + spec_.phase));
      }
      case Deformation::bending:
        break;
    }
    return r0;
  }

  Eigen::Vector3d point(const Eigen::Vector3d& u, double s) const {
    if (spec_.deformation == Deformation::bending) {
      return base_radius(u) * u + spec_.amplitude * s * s * u.x() * u.x() * band_;
    }
    return radius(u, s) * u;
  }

 private:
  const PhantomSpec& spec_;
  Eigen::Vector3d band_;
  std::array<double, kNumBumps> coeffs_{};
};

Frame3 frame_from(const Field& field, const SphereMesh& mesh, double s) {
  Frame3 f(static_cast<Eigen::Index>(mesh.dirs.size()), 3);
  for (std::size_t i = 0; i < mesh.dirs.size(); ++i) {
    f.row(static_cast<Eigen::Index>(i)) = field.point(mesh.dirs[i], s).transpose();
  }
  return f;
}

}  // namespace

const char* to_string(BaseShape b) {
  return b == BaseShape::ellipsoid ? "ellipsoid" : "bumpy_ellipsoid";
}

const char* to_string(Deformation d) {
  switch (d) {
    case Deformation::linear_stretch: return "linear_stretch";
    case Deformation::sinusoidal_radial: return "sinusoidal_radial";
    case Deformation::bending: return "bending";
  }
  return "unknown";
}

const char* to_string(Cycle c) { return c == Cycle::half ? "half" : "full"; }

BaseShape base_shape_from_string(const std::string& s) {
  if (s == "ellipsoid") return BaseShape::ellipsoid;
  if (s == "bumpy_ellipsoid") return BaseShape::bumpy_ellipsoid;
  throw Error(ErrorKind::spec, "unknown base shape '" + s + "'");
}

Deformation deformation_from_string(const std::string& s) {
  if (s == "linear_stretch") return Deformation::linear_stretch;
  if (s == "sinusoidal_radial") return Deformation::sinusoidal_radial;
  if (s == "bending") return Deformation::bending;
  throw Error(ErrorKind::spec, "unknown deformation '" + s + "'");
}

Cycle cycle_from_string(const std::string& s) {
  if (s == "half") return Cycle::half;
  if (s == "full") return Cycle::full;
  throw Error(ErrorKind::spec, "unknown cycle '" + s + "' (expected half or full)");
}

double PhantomSpec::min_base_radius() const {
  const double r = semi_axes.minCoeff();
  return base == BaseShape::bumpy_ellipsoid ? r * (1.0 - bump_scale) : r;
}

void PhantomSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::spec, "phantom: " + msg); };
  if (!(semi_axes.array() > 0.0).all() || !semi_axes.allFinite()) {
    fail("semi-axes must be positive");
  }
  if (n_frames < 2) fail("need at least 2 frames");
  if (n_vertices < 8) fail("need at least 8 vertices");
  if (!(bump_scale >= 0.0 && bump_scale < 0.5)) fail("bump_scale must lie in [0, 0.5)");
  if (!(band_normal.norm() > 0.0) || !band_normal.allFinite()) fail("band_normal must be non-zero");
  if (!(band_width > 0.0 && band_width < cap_start && cap_start <= 1.0)) {
    fail("need 0 < band_width < cap_start <= 1");
  }
  if (!(motion_floor >= 0.0 && motion_floor <= 1.0)) fail("motion_floor must lie in [0, 1]");
  if (!std::isfinite(phase)) fail("phase must be finite");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) fail("amplitude must be non-negative");
  const double limit = 0.25 * min_base_radius();
  if (amplitude >= limit) {
    fail("amplitude " + std::to_string(amplitude) + " mm must stay below 25% of the smallest radius (" +
         std::to_string(limit) + " mm)");
  }
}

double PhantomSpec::phase_of(double t) const {
  if (cycle == Cycle::half) return t / (n_frames - 1);
  return 0.5 * (1.0 - std::cos(2.0 * kPi * t / n_frames));
}

int achievable_vertex_count(int requested) {
  const auto [rings, segments] = ring_layout(requested);
  return 2 + rings * segments;
}

Frame3 generate_frame(const PhantomSpec& spec, int t) {
  spec.validate();
  if (t < 0 || t > spec.n_frames) {
    throw Error(ErrorKind::out_of_range, "phantom: frame " + std::to_string(t) + " outside 0.." +
                                             std::to_string(spec.n_frames));
  }
  const SphereMesh mesh = uv_sphere(spec.n_vertices);
  return frame_from(Field(spec), mesh, spec.phase_of(t));
}

ShapeSequence3D generate(const PhantomSpec& spec) {
  spec.validate();
  const SphereMesh mesh = uv_sphere(spec.n_vertices);
  const Field field(spec);
  std::vector<Frame3> frames(static_cast<std::size_t>(spec.n_frames));
#pragma omp parallel for
  for (int t = 0; t < spec.n_frames; ++t) {
    frames[static_cast<std::size_t>(t)] = frame_from(field, mesh, spec.phase_of(t));
  }
  return ShapeSequence3D(std::move(frames), mesh.triangles);
}

CrossSection analytic_cross_section(const PhantomSpec& spec, int t, const ScanPlane& plane,
                                    int nodes) {
  spec.validate();
  if (t < 0 || t > spec.n_frames) {
    throw Error(ErrorKind::out_of_range, "phantom: frame " + std::to_string(t) + " outside 0.." +
                                             std::to_string(spec.n_frames));
  }
  if (nodes < 16) throw Error(ErrorKind::spec, "analytic_cross_section: need at least 16 nodes");
  const double max_radius = spec.semi_axes.maxCoeff() *
                                (spec.base == BaseShape::bumpy_ellipsoid ? 1.0 + spec.bump_scale : 1.0) +
                            spec.amplitude;
  const double offset = std::abs(plane.signed_distance(Eigen::Vector3d::Zero()));
  if (offset > max_radius) {
    throw Error(ErrorKind::no_intersection, "analytic_cross_section: plane lies beyond the surface");
  }
  if (offset > 1e-9 * max_radius) {
    throw Error(ErrorKind::spec, "analytic_cross_section: only planes through the centre are supported");
  }
  if (spec.deformation == Deformation::bending && spec.amplitude != 0.0) {
    throw Error(ErrorKind::spec, "analytic_cross_section: bending sections are not star-shaped");
  }

  const Field field(spec);
  const double s = spec.phase_of(t);
  auto curve = [&](double psi) -> Eigen::Vector3d {
    const Eigen::Vector3d d = std::cos(psi) * plane.axis_x + std::sin(psi) * plane.axis_y;
    return field.radius(d, s) * d;
  };
  const double h = 1e-3;
  const double step = 2.0 * kPi / nodes;
  double len = 0.0, area = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double psi = k * step;
    const Eigen::Vector3d deriv = (-curve(psi + 2 * h) + 8.0 * curve(psi + h) -
                                   8.0 * curve(psi - h) + curve(psi - 2 * h)) /
                                  (12.0 * h);
    len += deriv.norm();
    const double r = curve(psi).norm();
    area += 0.5 * r * r;
  }
  return {len * step, area * step};
}

}  // namespace shapeinst
