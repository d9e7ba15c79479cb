#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "shapeinst/error.hpp"
#include "shapeinst/kernels.hpp"
#include "test_support.hpp"

using namespace shapeinst;
using testing_support::random_matrix;

TEST(Kernels, PairwiseMatchesNaiveOracle) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = random_matrix(rng, 13, 7, 5.0);
  const Eigen::MatrixXd d = kernels::serial::pairwise_sq_distances(x);
  for (int i = 0; i < 13; ++i) {
    for (int j = 0; j < 13; ++j) {
      EXPECT_NEAR(d(i, j), (x.row(i) - x.row(j)).squaredNorm(), 1e-12);
    }
    EXPECT_EQ(d(i, i), 0.0);
  }
  EXPECT_TRUE(d == d.transpose());
}

TEST(Kernels, SerialAndParallelAgreeBitForBit) {
  std::mt19937_64 rng(2);
  for (Eigen::Index n : {1, 2, 17, 64}) {
    const Eigen::MatrixXd x = random_matrix(rng, n, 33, 3.0);
    EXPECT_TRUE(kernels::serial::pairwise_sq_distances(x) == kernels::omp::pairwise_sq_distances(x));
    const Eigen::RowVectorXd q = random_matrix(rng, 1, 33);
    EXPECT_TRUE(kernels::serial::sq_distances_to(x, q) == kernels::omp::sq_distances_to(x, q));
  }
  const Eigen::MatrixXd a = random_matrix(rng, 500, 3);
  const Eigen::MatrixXd b = random_matrix(rng, 500, 3);
  EXPECT_TRUE(kernels::serial::vertex_distances(a, b) == kernels::omp::vertex_distances(a, b));
}

TEST(Kernels, DistancesToAPoint) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = random_matrix(rng, 6, 4);
  const Eigen::RowVectorXd q = x.row(2);
  const Eigen::VectorXd d = kernels::sq_distances_to(x, q);
  EXPECT_EQ(d(2), 0.0);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(d(i), (x.row(i) - q).squaredNorm(), 1e-13);
}

TEST(Kernels, VertexDistances) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd b(3, 3);
  b << 3, 0, 4, 0, 0, 0, 1, 2, 2;
  const Eigen::VectorXd d = kernels::vertex_distances(a, b);
  EXPECT_DOUBLE_EQ(d(0), 5.0);
  EXPECT_DOUBLE_EQ(d(1), 0.0);
  EXPECT_DOUBLE_EQ(d(2), 3.0);
}

TEST(Kernels, ShapeMismatchesThrow) {
  EXPECT_THROW(kernels::sq_distances_to(Eigen::MatrixXd::Zero(3, 4), Eigen::RowVectorXd::Zero(3)),
               Error);
  EXPECT_THROW(kernels::vertex_distances(Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(2, 3)),
               Error);
  EXPECT_THROW(kernels::omp::vertex_distances(Eigen::MatrixXd::Zero(3, 3),
                                              Eigen::MatrixXd::Zero(2, 3)),
               Error);
}

TEST(Kernels, NearbyRowsKeepTheirDigits) {
  // The expansion |a|^2 + |b|^2 - 2ab would return 0 or garbage here.
  Eigen::MatrixXd x(2, 2);
  x << 1e8, 1e8, 1e8 + 1e-4, 1e8;
  const double d = kernels::pairwise_sq_distances(x)(0, 1);
  const double exact = std::pow((1e8 + 1e-4) - 1e8, 2);
  EXPECT_NEAR(d, exact, 1e-12 * exact);
}
