#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "shapeinst/scanplane.hpp"
#include "shapeinst/ssm.hpp"

namespace shapeinst {

enum class BaseShape { ellipsoid, bumpy_ellipsoid };
enum class Deformation { linear_stretch, sinusoidal_radial, bending };
enum class Cycle { half, full };

const char* to_string(BaseShape b);
const char* to_string(Deformation d);
const char* to_string(Cycle c);
BaseShape base_shape_from_string(const std::string& s);
Deformation deformation_from_string(const std::string& s);
Cycle cycle_from_string(const std::string& s);

/// Star-shaped synthetic organ: every vertex is a fixed direction u on the
/// unit sphere, placed at radius rho(u, s) where s in [0, 1] is the motion
/// phase of the frame.
///
/// With h = |u . band_normal|, directions with h <= band_width form the band
/// and those with h >= cap_start the polar caps; a smoothstep blends the two.
/// The band moves with full amplitude, the caps with `motion_floor` times
/// it. In the sinusoidal mode the band follows cos(pi s); the caps rotate
/// towards cos(2 pi s) by a mixing angle of up to pi/3, with opposite sign on
/// the two caps, so the caps are a non-linear function of what a slice
/// through the band sees.
struct PhantomSpec {
  BaseShape base = BaseShape::ellipsoid;
  Eigen::Vector3d semi_axes{60.0, 40.0, 30.0};  // mm
  int n_frames = 20;
  int n_vertices = 1000;  // rounded to the nearest achievable UV-sphere count
  Deformation deformation = Deformation::sinusoidal_radial;
  double amplitude = 7.0;  // mm
  double phase = 0.0;      // radians, added inside the sinusoid
  Cycle cycle = Cycle::half;
  std::uint64_t seed = 0;  // drives the bumpy base only
  double bump_scale = 0.05;  // relative radius perturbation of the bumpy base
  Eigen::Vector3d band_normal = Eigen::Vector3d::UnitZ();
  double band_width = 0.35;
  double cap_start = 0.9;
  double motion_floor = 0.3;

  /// Throws Error(spec) on invalid fields, including an amplitude of 25% of
  /// the smallest base radius or more.
  void validate() const;
  double min_base_radius() const;
  /// Motion phase of frame t. Full cycles return to s = 0 at t = n_frames.
  double phase_of(double t) const;
};

/// Vertex count actually produced for a requested count.
int achievable_vertex_count(int requested);

ShapeSequence3D generate(const PhantomSpec& spec);
/// Frame t of the sequence; t = n_frames is allowed for periodicity checks.
Frame3 generate_frame(const PhantomSpec& spec, int t);

struct CrossSection {
  double perimeter = 0.0;
  double area = 0.0;
};

/// Exact cross-section of the continuous (unmeshed) deformed surface by a
/// plane through the phantom centre, integrated by the periodic trapezoid
/// rule. Planes entirely outside the surface raise Error(no_intersection);
/// other off-centre planes and the non-radial bending mode raise Error(spec).
CrossSection analytic_cross_section(const PhantomSpec& spec, int t, const ScanPlane& plane,
                                    int nodes = 4096);

}  // namespace shapeinst
