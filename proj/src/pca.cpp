#include "shapeinst/spca.hpp"

#include <Eigen/SVD>

namespace shapeinst {

PcaResult pca(const Eigen::Ref<const Eigen::MatrixXd>& y_norm) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(y_norm, Eigen::ComputeThinU | Eigen::ComputeThinV);
  PcaResult out;
  out.singular_values = svd.singularValues();
  Eigen::MatrixXd u = svd.matrixU();
  out.loadings = svd.matrixV();
  for (Eigen::Index c = 0; c < out.loadings.cols(); ++c) {
    Eigen::Index arg = 0;
    out.loadings.col(c).cwiseAbs().maxCoeff(&arg);
    if (out.loadings(arg, c) < 0.0) {
      out.loadings.col(c) *= -1.0;
      u.col(c) *= -1.0;
    }
  }
  out.components = u * out.singular_values.asDiagonal();
  return out;
}

}  // namespace shapeinst
