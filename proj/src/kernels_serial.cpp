#include "shapeinst/kernels.hpp"

#include <cmath>

#include "shapeinst/error.hpp"

namespace shapeinst::kernels::serial {

namespace {

// Differences are squared term by term rather than through the
// |a|^2 + |b|^2 - 2ab expansion, which loses digits for nearby rows.
inline double row_sq_distance(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                              Eigen::Index i, Eigen::Index j) {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double d = rows(i, c) - rows(j, c);
    acc += d * d;
  }
  return acc;
}

}  // namespace

Eigen::MatrixXd pairwise_sq_distances(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  const Eigen::Index n = rows.rows();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = row_sq_distance(rows, i, j);
      out(i, j) = d;
      out(j, i) = d;
    }
  }
  return out;
}

Eigen::VectorXd sq_distances_to(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                                const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  if (x.size() != rows.cols()) {
    throw Error(ErrorKind::structural, "sq_distances_to: dimension mismatch");
  }
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const double d = rows(i, c) - x(c);
      acc += d * d;
    }
    out(i) = acc;
  }
  return out;
}

Eigen::VectorXd vertex_distances(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                 const Eigen::Ref<const Eigen::MatrixXd>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::structural, "vertex_distances: frame shapes differ");
  }
  Eigen::VectorXd out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double d = a(i, c) - b(i, c);
      acc += d * d;
    }
    out(i) = std::sqrt(acc);
  }
  return out;
}

}  // namespace shapeinst::kernels::serial
