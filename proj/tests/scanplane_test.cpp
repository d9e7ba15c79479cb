#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "shapeinst/phantom.hpp"
#include "shapeinst/scanplane.hpp"
#include "test_support.hpp"

using namespace shapeinst;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

double sum_sq(const ScanPlane& p, const std::vector<Eigen::Vector3d>& pts,
              const std::vector<double>& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = (pts[i] - p.origin).dot(p.normal);
    acc += w[i] * d * d;
  }
  return acc;
}

void expect_same_plane(const ScanPlane& a, const ScanPlane& b, double tol) {
  EXPECT_LT((a.origin - b.origin).norm(), tol);
  EXPECT_LT((a.axis_x - b.axis_x).norm(), tol);
  EXPECT_LT((a.axis_y - b.axis_y).norm(), tol);
  EXPECT_LT((a.normal - b.normal).norm(), tol);
}

ShapeSequence3D cube_sequence(int frames) {
  Frame3 v;
  std::vector<Triangle> f;
  unit_cube(v, f);
  return ShapeSequence3D(std::vector<Frame3>(static_cast<std::size_t>(frames), v), f);
}

}  // namespace

TEST(ScanPlane, FromNormalBuildsARightHandedFrame) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const ScanPlane p = ScanPlane::from_normal(random_matrix(rng, 3, 1), random_unit(rng));
    EXPECT_LT(p.frame_error(), 1e-10);
    EXPECT_GE(p.axis_x.dot(Eigen::Vector3d::UnitX()), 0.0);
  }
  const ScanPlane q = ScanPlane::from_normal(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX());
  EXPECT_LT(q.frame_error(), 1e-12);
  EXPECT_NEAR(std::abs(q.axis_x.dot(Eigen::Vector3d::UnitY())), 1.0, 1e-12);
  EXPECT_THROW(ScanPlane::from_normal(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()), Error);
}

TEST(WeightedPlane, CoplanarPointsFitExactly) {
  std::mt19937_64 rng(2);
  const Eigen::Vector3d n = random_unit(rng);
  const ScanPlane truth = ScanPlane::from_normal(Eigen::Vector3d(1, 2, 3), n);
  std::vector<Eigen::Vector3d> pts;
  std::vector<double> w;
  for (int i = 0; i < 12; ++i) {
    pts.push_back(truth.to_world(Eigen::Vector2d(uniform(rng, -5, 5), uniform(rng, -5, 5))));
    w.push_back(uniform(rng, 0.1, 2.0));
  }
  const PlaneFit f = fit_weighted_plane(pts, w);
  EXPECT_LT(f.weighted_sq_residual, 1e-20);
  EXPECT_NEAR(std::abs(f.plane.normal.dot(n)), 1.0, 1e-8);
  EXPECT_LT(f.plane.frame_error(), 1e-10);
}

TEST(WeightedPlane, ZeroWeightOutlierIsIgnored) {
  const std::vector<Eigen::Vector3d> pts{{0, 0, 1}, {4, 0, 1}, {0, 3, 1}, {2, 2, 50}};
  const PlaneFit f = fit_weighted_plane(pts, {1.0, 2.0, 1.0, 0.0});
  EXPECT_NEAR(std::abs(f.plane.normal.z()), 1.0, 1e-12);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(f.plane.signed_distance(pts[i]), 0.0, 1e-12);
}

TEST(WeightedPlane, DegenerateInputs) {
  const std::vector<Eigen::Vector3d> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  try {
    fit_weighted_plane(line, {1, 1, 1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_geometry);
  }
  const std::vector<Eigen::Vector3d> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  EXPECT_THROW(fit_weighted_plane(pts, {1, 1, 0, 0}), Error);
  EXPECT_THROW(fit_weighted_plane(pts, {1, 1, 1}), Error);
}

TEST(WeightedPlane, BeatsRandomCandidatePlanes) {
  std::mt19937_64 rng(3);
  std::vector<Eigen::Vector3d> pts;
  std::vector<double> w;
  for (int i = 0; i < 20; ++i) {
    pts.push_back(Eigen::Vector3d(uniform(rng, -10, 10), uniform(rng, -5, 5), uniform(rng, -2, 2)));
    w.push_back(uniform(rng, 0.0, 1.0));
  }
  const PlaneFit f = fit_weighted_plane(pts, w);
  EXPECT_NEAR(f.weighted_sq_residual, sum_sq(f.plane, pts, w), 1e-10);
  EXPECT_NEAR(f.weighted_sq_residual, weighted_sq_residual(f.plane, pts, w), 1e-10);
  for (int i = 0; i < 10000; ++i) {
    const ScanPlane cand = ScanPlane::from_normal(
        Eigen::Vector3d(uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -3, 3)),
        random_unit(rng));
    ASSERT_LE(f.weighted_sq_residual, sum_sq(cand, pts, w) + 1e-12);
  }
}

TEST(WeightedPlane, ScaleEquivarianceAndWeightInvariance) {
  std::mt19937_64 rng(4);
  std::vector<Eigen::Vector3d> pts, scaled;
  std::vector<double> w, w3;
  for (int i = 0; i < 15; ++i) {
    pts.push_back(random_matrix(rng, 3, 1, 4.0));
    scaled.push_back(2.5 * pts.back());
    w.push_back(uniform(rng, 0.1, 1.0));
    w3.push_back(7.0 * w.back());
  }
  const PlaneFit a = fit_weighted_plane(pts, w);
  const PlaneFit b = fit_weighted_plane(scaled, w);
  const PlaneFit c = fit_weighted_plane(pts, w3);
  EXPECT_NEAR(std::abs(a.plane.normal.dot(b.plane.normal)), 1.0, 1e-12);
  EXPECT_NEAR(b.weighted_sq_residual, 2.5 * 2.5 * a.weighted_sq_residual,
              1e-10 * b.weighted_sq_residual);
  EXPECT_NEAR(b.weighted_abs_residual, 2.5 * a.weighted_abs_residual, 1e-10);
  expect_same_plane(a.plane, c.plane, 1e-10);
}

TEST(Perturb, IdentityTranslationAndQuarterTurn) {
  std::mt19937_64 rng(5);
  const ScanPlane p = ScanPlane::from_normal(Eigen::Vector3d(3, -1, 2), random_unit(rng));
  const ScanPlane same = perturb_plane(p, {0, 0, 0});
  EXPECT_TRUE(same.origin == p.origin && same.normal == p.normal && same.axis_x == p.axis_x);

  const ScanPlane moved = perturb_plane(p, {0, 0, 6});
  EXPECT_LT((moved.origin - (p.origin + 6.0 * p.normal)).norm(), 1e-12);
  EXPECT_LT((moved.normal - p.normal).norm(), 1e-15);
  EXPECT_LT((moved.axis_x - p.axis_x).norm(), 1e-15);

  // A right-handed quarter turn about axis_x carries the normal onto the
  // former axis_y line (onto -axis_y, by the right-hand rule).
  const ScanPlane turned = perturb_plane(p, {90, 0, 0});
  EXPECT_NEAR(std::abs(turned.normal.dot(p.axis_y)), 1.0, 1e-10);
  EXPECT_LT((turned.normal + p.axis_y).norm(), 1e-10);
  EXPECT_LT((turned.axis_x - p.axis_x).norm(), 1e-12);
  EXPECT_LT(turned.frame_error(), 1e-10);
}

TEST(Perturb, InverseRestoresThePlane) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const ScanPlane p = ScanPlane::from_normal(random_matrix(rng, 3, 1, 10.0), random_unit(rng));
    const PlanePerturbation d{uniform(rng, -30, 30), uniform(rng, -30, 30), uniform(rng, -10, 10)};
    expect_same_plane(perturb_inverse(perturb_plane(p, d), d), p, 1e-9);
  }
}

TEST(Perturb, PresetHasThirteenPlanes) {
  const auto preset = deviation_preset();
  ASSERT_EQ(preset.size(), 13u);
  EXPECT_EQ(preset[0].rot_x_deg, 0.0);
  EXPECT_EQ(preset[0].translate_z_mm, 0.0);
  double max_rot = 0, max_tz = 0;
  for (const auto& d : preset) {
    const int nonzero = (d.rot_x_deg != 0) + (d.rot_y_deg != 0) + (d.translate_z_mm != 0);
    EXPECT_LE(nonzero, 1);
    max_rot = std::max({max_rot, std::abs(d.rot_x_deg), std::abs(d.rot_y_deg)});
    max_tz = std::max(max_tz, std::abs(d.translate_z_mm));
  }
  EXPECT_EQ(max_rot, 6.0);
  EXPECT_EQ(max_tz, 6.0);
}

TEST(Slice, CubeMidplaneIsTheUnitSquare) {
  Frame3 v;
  std::vector<Triangle> f;
  unit_cube(v, f);
  const ScanPlane p = ScanPlane::from_normal(Eigen::Vector3d(0.5, 0.5, 0.5), Eigen::Vector3d::UnitZ());
  const SliceResult r = slice_mesh(v, f, p);
  EXPECT_TRUE(r.contour.closed);
  EXPECT_EQ(r.loops_found, 1);
  EXPECT_EQ(r.loops_discarded, 0);
  EXPECT_NEAR(r.contour.perimeter(), 4.0, 1e-9);
  EXPECT_NEAR(r.contour.signed_area(), 1.0, 1e-9);
}

TEST(Slice, SphereCentralSectionIsNearlyAGreatCircle) {
  Frame3 v;
  std::vector<Triangle> f;
  uv_sphere(10.0, 50, 50, v, f);
  ASSERT_EQ(f.size(), 5000u);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 5; ++i) {
    const ScanPlane p = ScanPlane::from_normal(Eigen::Vector3d::Zero(), random_unit(rng));
    const SliceResult r = slice_mesh(v, f, p);
    EXPECT_EQ(r.loops_found, 1);
    EXPECT_NEAR(r.contour.perimeter() / (2 * kPi * 10.0), 1.0, 0.005);
    EXPECT_GT(r.contour.signed_area(), 0.0);
  }
}

TEST(Slice, MissingPlaneIsNoIntersection) {
  Frame3 v;
  std::vector<Triangle> f;
  unit_cube(v, f);
  try {
    slice_mesh(v, f, ScanPlane::from_normal(Eigen::Vector3d(0, 0, 5), Eigen::Vector3d::UnitZ()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::no_intersection);
  }
}

TEST(Slice, HoleInTheMeshGivesAnOpenContour) {
  Frame3 v;
  std::vector<Triangle> f;
  unit_cube(v, f);
  // Drop the two triangles of the y = 0 face.
  std::vector<Triangle> holed;
  for (const auto& t : f) {
    if (!(v(t[0], 1) == 0 && v(t[1], 1) == 0 && v(t[2], 1) == 0)) holed.push_back(t);
  }
  ASSERT_EQ(holed.size(), 10u);
  const SliceResult r =
      slice_mesh(v, holed, ScanPlane::from_normal(Eigen::Vector3d(0.5, 0.5, 0.5), Eigen::Vector3d::UnitZ()));
  EXPECT_FALSE(r.contour.closed);
  EXPECT_NEAR(r.contour.perimeter(), 3.0, 1e-9);
}

TEST(Resample, SquareCorners) {
  PlanarContour sq;
  sq.vertices.resize(8, 2);
  sq.vertices << 0, 0, 0.5, 0, 1, 0, 1, 0.5, 1, 1, 0.5, 1, 0, 1, 0, 0.5;
  const PlanarContour r = resample_contour(sq, 4);
  ASSERT_EQ(r.vertices.rows(), 4);
  EXPECT_NEAR(r.vertices(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(r.vertices(0, 1), 1.0, 1e-12);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR((r.vertices.row((i + 1) % 4) - r.vertices.row(i)).norm(), 1.0, 1e-12);
    const double x = r.vertices(i, 0), y = r.vertices(i, 1);
    EXPECT_TRUE((std::abs(x) < 1e-12 || std::abs(x - 1) < 1e-12) &&
                (std::abs(y) < 1e-12 || std::abs(y - 1) < 1e-12));
  }
}

TEST(Resample, UniformPolygonIsAFixedPoint) {
  for (int n : {5, 12, 64}) {
    PlanarContour c{regular_polygon(n, 3.0, 0.3), true};
    const PlanarContour r = resample_contour(c, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = 1e9;
      for (Eigen::Index j = 0; j < n; ++j) {
        best = std::min(best, (r.vertices.row(i) - c.vertices.row(j)).norm());
      }
      EXPECT_LT(best, 1e-9);
    }
  }
}

TEST(Resample, CircleGapsAreEqual) {
  PlanarContour c{regular_polygon(997, 5.0), true};
  const PlanarContour r = resample_contour(c, 64);
  const Eigen::Index m = c.vertices.rows();
  std::vector<double> cum{0.0};
  for (Eigen::Index j = 0; j < m; ++j) {
    cum.push_back(cum.back() + (c.vertices.row((j + 1) % m) - c.vertices.row(j)).norm());
  }
  // Arc-length position of each output point along the input polygon.
  std::vector<double> pos;
  for (Eigen::Index i = 0; i < 64; ++i) {
    const Eigen::RowVector2d q = r.vertices.row(i);
    double best = 1e9, at = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::RowVector2d a = c.vertices.row(j), b = c.vertices.row((j + 1) % m);
      const double len = (b - a).norm();
      const double s = std::clamp((q - a).dot(b - a) / (len * len), 0.0, 1.0);
      const double d = (a + s * (b - a) - q).norm();
      if (d < best) {
        best = d;
        at = cum[static_cast<std::size_t>(j)] + s * len;
      }
    }
    ASSERT_LT(best, 1e-9);
    pos.push_back(at);
  }
  const double perimeter = cum.back();
  for (int i = 0; i < 64; ++i) {
    double gap = pos[static_cast<std::size_t>((i + 1) % 64)] - pos[static_cast<std::size_t>(i)];
    if (gap < 0) gap += perimeter;
    EXPECT_NEAR(gap, perimeter / 64, 1e-6);
  }
  EXPECT_GT(r.signed_area(), 0.0);
}

TEST(Resample, PerimeterConverges) {
  PlanarContour c{regular_polygon(4096, 2.0), true};
  const double target = c.perimeter();
  double prev_err = 1e9;
  for (int n : {16, 64, 256}) {
    const PlanarContour r = resample_contour(c, n);
    const double err = std::abs(r.perimeter() - target);
    EXPECT_LT(err, target / n);
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
}

TEST(Resample, DegenerateContours) {
  PlanarContour dot{Frame2::Zero(4, 2), true};
  try {
    resample_contour(dot, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_geometry);
  }
  PlanarContour c{regular_polygon(8, 1.0), true};
  EXPECT_THROW(resample_contour(c, 2), Error);
}

TEST(ContourSequence, StaticSequenceGivesIdenticalContours) {
  const auto seq = cube_sequence(4);
  const auto cs = build_contour_sequence(
      seq, ScanPlane::from_normal(Eigen::Vector3d(0.5, 0.5, 0.4), Eigen::Vector3d(0.1, 0.2, 1.0)), 32);
  ASSERT_EQ(cs.num_frames(), 4u);
  for (std::size_t t = 1; t < 4; ++t) EXPECT_TRUE(cs.frame(t) == cs.frame(0));
}

TEST(ContourSequence, SerialAndParallelAgree) {
  PhantomSpec spec;
  spec.n_frames = 6;
  const auto seq = generate(spec);
  const ScanPlane p = ScanPlane::from_normal(Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0.05, 0.1, 1));
  const auto a = build_contour_sequence(seq, p, 64, Execution::serial);
  const auto b = build_contour_sequence(seq, p, 64, Execution::parallel);
  for (std::size_t t = 0; t < 6; ++t) EXPECT_TRUE(a.frame(t) == b.frame(t));
}

TEST(ContourSequence, PhantomPerimetersMatchAnalyticSections) {
  PhantomSpec spec;
  spec.n_vertices = 5000;
  const auto seq = generate(spec);
  for (const Eigen::Vector3d& n : {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0.2, -0.1, 1.0),
                                   Eigen::Vector3d(1, 0, 0)}) {
    const ScanPlane p = ScanPlane::from_normal(Eigen::Vector3d::Zero(), n);
    const auto cs = build_contour_sequence(seq, p, 256);
    for (std::size_t t = 0; t < seq.num_frames(); ++t) {
      const SliceResult r = slice_mesh(seq.frame(t), seq.triangles(), p);
      const CrossSection exact = analytic_cross_section(spec, static_cast<int>(t), p);
      EXPECT_NEAR(r.contour.perimeter() / exact.perimeter, 1.0, 0.01) << "frame " << t;
      const PlanarContour resampled{cs.frame(t), true};
      EXPECT_NEAR(resampled.perimeter() / exact.perimeter, 1.0, 0.01) << "frame " << t;
    }
  }
}

TEST(ContourSequence, SmallPlaneShiftsMoveContoursContinuously) {
  PhantomSpec spec;
  spec.n_frames = 3;
  const auto seq = generate(spec);
  const ScanPlane base = ScanPlane::from_normal(Eigen::Vector3d(0, 0, 2), Eigen::Vector3d(0.05, 0.02, 1));
  const auto ref = build_contour_sequence(seq, base, 64);
  double prev = 1e9;
  for (double eps : {1.0, 0.1, 0.01}) {
    const auto moved = build_contour_sequence(seq, perturb_plane(base, {0, 0, eps}), 64);
    double worst = 0.0;
    for (std::size_t t = 0; t < seq.num_frames(); ++t) {
      worst = std::max(worst, (moved.frame(t) - ref.frame(t)).rowwise().norm().maxCoeff());
    }
    EXPECT_LT(worst, prev);
    prev = worst;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(ContourSequence, FailingFrameIsNamed) {
  PhantomSpec spec;
  spec.n_frames = 3;
  const auto seq = generate(spec);
  try {
    build_contour_sequence(seq, ScanPlane::from_normal(Eigen::Vector3d(0, 0, 500), Eigen::Vector3d::UnitZ()), 16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::no_intersection);
    EXPECT_NE(std::string(e.what()).find("frame"), std::string::npos);
  }
}
