#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "shapeinst/phantom.hpp"
#include "shapeinst/ssm.hpp"
#include "test_support.hpp"

using namespace shapeinst;
using testing_support::random_matrix;

TEST(Flatten, InterleavesCoordinatesPerVertex) {
  Frame3 f(2, 3);
  f << 1, 2, 3, 4, 5, 6;
  const DesignMatrix m = flatten(std::vector<Frame3>{f});
  ASSERT_EQ(m.rows(), 1);
  ASSERT_EQ(m.cols(), 6);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(m.values(0, i), i + 1);
  EXPECT_EQ(m.layout.index(1, 2), 5);
}

TEST(Flatten, RoundTripIsBitIdentical) {
  std::mt19937_64 rng(1);
  std::vector<Frame3> frames;
  for (int t = 0; t < 5; ++t) frames.push_back(random_matrix(rng, 7, 3));
  const auto back = unflatten3(flatten(frames));
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) EXPECT_TRUE(back[t] == frames[t]);

  std::vector<Frame2> f2;
  for (int t = 0; t < 4; ++t) f2.push_back(random_matrix(rng, 9, 2));
  const auto back2 = unflatten2(flatten(f2));
  for (std::size_t t = 0; t < f2.size(); ++t) EXPECT_TRUE(back2[t] == f2[t]);
}

TEST(Flatten, DefaultPhantomDimensions) {
  PhantomSpec spec;
  spec.n_vertices = achievable_vertex_count(1000);
  const auto seq = generate(spec);
  const DesignMatrix m = flatten(seq);
  EXPECT_EQ(m.rows(), 20);
  EXPECT_EQ(m.cols(), 3 * seq.num_vertices());
}

TEST(Flatten, RaggedFramesAreStructuralErrors) {
  std::vector<Frame3> frames{Frame3::Zero(3, 3), Frame3::Zero(4, 3)};
  try {
    flatten(frames);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::structural);
  }
  EXPECT_THROW(ShapeSequence3D(frames, {}), Error);
}

TEST(Flatten, SingleRowHelpersRoundTrip) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd f = random_matrix(rng, 5, 3);
  const Eigen::RowVectorXd row = flatten_frame(f);
  EXPECT_EQ(row(4), f(1, 1));
  EXPECT_TRUE(unflatten_row(row, 3) == f);
}

TEST(CenterNormalize, TwoPointSymmetry) {
  DesignMatrix m;
  m.values.resize(2, 2);
  m.values << 1, 3, 3, 1;
  m.layout = {1, 2};
  const auto [out, stats] = center_normalize(m, NormalizeMode::center_and_normalize);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(out.values(0, 0), -s, 1e-15);
  EXPECT_NEAR(out.values(0, 1), s, 1e-15);
  EXPECT_NEAR(out.values(1, 0), s, 1e-15);
  EXPECT_NEAR(out.values(1, 1), -s, 1e-15);
  EXPECT_DOUBLE_EQ(stats.column_means(0), 2.0);
  EXPECT_DOUBLE_EQ(stats.column_means(1), 2.0);
  EXPECT_NEAR(stats.column_norms(0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(stats.column_norms(1), std::sqrt(2.0), 1e-15);
}

TEST(CenterNormalize, ConstantColumnStaysZero) {
  DesignMatrix m;
  m.values.resize(3, 2);
  m.values << 5, 1, 5, 2, 5, 4;
  m.layout = {1, 2};
  const auto [out, stats] = center_normalize(m, NormalizeMode::center_and_normalize);
  EXPECT_EQ(out.values.col(0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(stats.column_norms(0), 0.0);
  EXPECT_NEAR(out.values.col(1).norm(), 1.0, 1e-14);
}

TEST(CenterNormalize, ColumnsSumToZero) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    DesignMatrix m{random_matrix(rng, 6, 4, 10.0), {4, 1}};
    m.values.array() += 3.0;
    for (auto mode : {NormalizeMode::center_only, NormalizeMode::center_and_normalize}) {
      const auto [out, stats] = center_normalize(m, mode);
      for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(out.values.col(j).sum(), 0.0, 1e-12);
      if (mode == NormalizeMode::center_and_normalize) {
        for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(out.values.col(j).norm(), 1.0, 1e-12);
      }
    }
  }
}

TEST(CenterNormalize, CenterOnlyIsIdempotent) {
  std::mt19937_64 rng(4);
  DesignMatrix m{random_matrix(rng, 8, 5, 3.0), {5, 1}};
  const auto once = center_normalize(m, NormalizeMode::center_only).first;
  const auto twice = center_normalize(once, NormalizeMode::center_only).first;
  EXPECT_LT((once.values - twice.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CenterNormalize, StatsReproduceTheTransform) {
  std::mt19937_64 rng(5);
  DesignMatrix m{random_matrix(rng, 7, 6, 2.0), {2, 3}};
  const auto [out, stats] = center_normalize(m, NormalizeMode::center_and_normalize);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    EXPECT_LT((stats.apply(m.values.row(i)) - out.values.row(i)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(MeanDistanceError, IdentityAndOffset) {
  std::mt19937_64 rng(6);
  const Frame3 a = random_matrix(rng, 12, 3);
  EXPECT_EQ(mean_distance_error(a, a), 0.0);
  Frame3 b = a;
  b.rowwise() += Eigen::RowVector3d(3, 0, 4);
  EXPECT_NEAR(mean_distance_error(b, a), 5.0, 1e-13);
}

TEST(MeanDistanceError, MatchesLoopOracle) {
  std::mt19937_64 rng(7);
  const Frame3 a = random_matrix(rng, 10, 3);
  const Frame3 b = random_matrix(rng, 10, 3);
  double acc = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double dx = a(i, 0) - b(i, 0), dy = a(i, 1) - b(i, 1), dz = a(i, 2) - b(i, 2);
    acc += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  EXPECT_NEAR(mean_distance_error(a, b), acc / 10.0, 1e-12);
}

TEST(MeanDistanceError, CountMismatchIsStructural) {
  try {
    mean_distance_error(Frame3::Zero(3, 3), Frame3::Zero(4, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::structural);
  }
}

TEST(MeanDistanceError, IsAMetric) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Frame3 a = random_matrix(rng, 6, 3);
    const Frame3 b = random_matrix(rng, 6, 3);
    const Frame3 c = random_matrix(rng, 6, 3);
    EXPECT_DOUBLE_EQ(mean_distance_error(a, b), mean_distance_error(b, a));
    EXPECT_GT(mean_distance_error(a, b), 0.0);
    EXPECT_LE(mean_distance_error(a, c),
              mean_distance_error(a, b) + mean_distance_error(b, c) + 1e-12);
  }
}

TEST(MeanDistanceError, TranslationOfBothArgumentsIsInvisible) {
  std::mt19937_64 rng(9);
  Frame3 a = random_matrix(rng, 6, 3);
  Frame3 b = random_matrix(rng, 6, 3);
  const double before = mean_distance_error(a, b);
  a.rowwise() += Eigen::RowVector3d(10, -4, 7);
  b.rowwise() += Eigen::RowVector3d(10, -4, 7);
  EXPECT_NEAR(mean_distance_error(a, b), before, 1e-12);
}

TEST(ShapeVariation, NeighbourDistances) {
  std::mt19937_64 rng(10);
  const Frame3 a = random_matrix(rng, 5, 3);
  Frame3 c = a;
  c.rowwise() += Eigen::RowVector3d(0, 0, 2);
  const ShapeSequence3D same({a, random_matrix(rng, 5, 3), a}, {});
  EXPECT_EQ(shape_variation(same, 1), 0.0);
  const ShapeSequence3D shifted({a, random_matrix(rng, 5, 3), c}, {});
  EXPECT_NEAR(shape_variation(shifted, 1), 2.0, 1e-14);
}

TEST(ShapeVariation, BoundaryFramesAreRefused) {
  std::mt19937_64 rng(11);
  const ShapeSequence3D seq({random_matrix(rng, 4, 3), random_matrix(rng, 4, 3),
                             random_matrix(rng, 4, 3)},
                            {});
  for (std::size_t t : {std::size_t{0}, std::size_t{2}, std::size_t{7}}) {
    try {
      shape_variation(seq, t);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::out_of_range);
    }
  }
  EXPECT_NEAR(one_sided_variation(seq, 0), mean_distance_error(seq.frame(0), seq.frame(1)), 1e-15);
  EXPECT_NEAR(one_sided_variation(seq, 2), mean_distance_error(seq.frame(2), seq.frame(1)), 1e-15);
}

TEST(ShapeVariation, MatchesGeneratorFormula) {
  // Amplitude-only radial motion on a sphere with the default band layout:
  // vertex i sits at r0 + A w(u) g(u, s) along its direction, so the
  // neighbour distance is |A w (g(s+) - g(s-))| with g evaluated directly.
  PhantomSpec spec;
  spec.semi_axes = {20, 20, 20};
  spec.n_vertices = 300;
  spec.n_frames = 9;
  spec.amplitude = 3.0;
  const auto seq = generate(spec);
  const double pi = std::numbers::pi;
  for (std::size_t t = 1; t + 1 < seq.num_frames(); ++t) {
    const double sm = spec.phase_of(static_cast<double>(t) - 1);
    const double sp = spec.phase_of(static_cast<double>(t) + 1);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < seq.num_vertices(); ++i) {
      const Eigen::Vector3d u = seq.frame(0).row(i).normalized().transpose();
      const double h = std::abs(u.z());
      double x = (h - spec.band_width) / (spec.cap_start - spec.band_width);
      x = std::min(1.0, std::max(0.0, x));
      const double blend = x * x * (3 - 2 * x);
      const double w = 1.0 - (1.0 - spec.motion_floor) * blend;
      const double m = (u.z() >= 0 ? 1.0 : -1.0) * (pi / 3) * blend;
      auto g = [&](double s) {
        return std::cos(m) * std::cos(pi * s) + std::sin(m) * std::cos(2 * pi * s);
      };
      acc += std::abs(spec.amplitude * w * (g(sp) - g(sm)));
    }
    EXPECT_NEAR(shape_variation(seq, t), acc / static_cast<double>(seq.num_vertices()), 1e-10)
        << "frame " << t;
  }
}
