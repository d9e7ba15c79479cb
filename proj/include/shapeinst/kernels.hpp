#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an OpenMP
// version; each output element is produced by the same arithmetic in both, so
// the results agree bit for bit.

#include <Eigen/Dense>

namespace shapeinst {

enum class Execution { serial, parallel };

namespace kernels {

namespace serial {

/// D(i, j) = squared Euclidean distance between rows i and j.
Eigen::MatrixXd pairwise_sq_distances(const Eigen::Ref<const Eigen::MatrixXd>& rows);

/// out(i) = squared distance between x and rows.row(i).
Eigen::VectorXd sq_distances_to(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                                const Eigen::Ref<const Eigen::RowVectorXd>& x);

/// Per-vertex Euclidean distance between two frames of equal shape.
Eigen::VectorXd vertex_distances(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                 const Eigen::Ref<const Eigen::MatrixXd>& b);

}  // namespace serial

namespace omp {

Eigen::MatrixXd pairwise_sq_distances(const Eigen::Ref<const Eigen::MatrixXd>& rows);
Eigen::VectorXd sq_distances_to(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                                const Eigen::Ref<const Eigen::RowVectorXd>& x);
Eigen::VectorXd vertex_distances(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                 const Eigen::Ref<const Eigen::MatrixXd>& b);

}  // namespace omp

inline Eigen::MatrixXd pairwise_sq_distances(
    const Eigen::Ref<const Eigen::MatrixXd>& rows, Execution ex = Execution::parallel) {
  return ex == Execution::serial ? serial::pairwise_sq_distances(rows)
                                 : omp::pairwise_sq_distances(rows);
}

inline Eigen::VectorXd sq_distances_to(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                                       const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                       Execution ex = Execution::parallel) {
  return ex == Execution::serial ? serial::sq_distances_to(rows, x)
                                 : omp::sq_distances_to(rows, x);
}

inline Eigen::VectorXd vertex_distances(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                        const Eigen::Ref<const Eigen::MatrixXd>& b,
                                        Execution ex = Execution::serial) {
  return ex == Execution::serial ? serial::vertex_distances(a, b)
                                 : omp::vertex_distances(a, b);
}

}  // namespace kernels
}  // namespace shapeinst
