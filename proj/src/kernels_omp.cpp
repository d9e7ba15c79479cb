#include "shapeinst/kernels.hpp"

#include <cmath>

#include "shapeinst/error.hpp"

namespace shapeinst::kernels::omp {

Eigen::MatrixXd pairwise_sq_distances(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index dim = rows.cols();
  Eigen::MatrixXd out(n, n);
  // Full square rather than the upper triangle so the rows balance; D(j, i) is
  // evaluated with the operands swapped, which squares the same differences.
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        out(i, j) = 0.0;
        continue;
      }
      const Eigen::Index lo = std::min(i, j);
      const Eigen::Index hi = std::max(i, j);
      double acc = 0.0;
      for (Eigen::Index c = 0; c < dim; ++c) {
        const double d = rows(lo, c) - rows(hi, c);
        acc += d * d;
      }
      out(i, j) = acc;
    }
  }
  return out;
}

Eigen::VectorXd sq_distances_to(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                                const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  if (x.size() != rows.cols()) {
    throw Error(ErrorKind::structural, "sq_distances_to: dimension mismatch");
  }
  const Eigen::Index n = rows.rows();
  const Eigen::Index dim = rows.cols();
  Eigen::VectorXd out(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < dim; ++c) {
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
  const Eigen::Index n = a.rows();
  const Eigen::Index dim = a.cols();
  Eigen::VectorXd out(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double d = a(i, c) - b(i, c);
      acc += d * d;
    }
    out(i) = std::sqrt(acc);
  }
  return out;
}

}  // namespace shapeinst::kernels::omp
