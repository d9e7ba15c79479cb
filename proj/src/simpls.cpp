#include "shapeinst/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace shapeinst {

namespace {

// A component whose deflated cross-product falls below this fraction of the
// first singular value carries no covariance left to explain.
constexpr double kRankTolerance = 1e-12;

void orthogonalize_against(const Eigen::MatrixXd& basis, Eigen::Index used,
                           Eigen::Ref<Eigen::VectorXd> v) {
  if (used == 0) return;
  // Two passes of classical Gram-Schmidt keep the basis orthonormal to
  // working precision.
  for (int pass = 0; pass < 2; ++pass) {
    v -= basis.leftCols(used) * (basis.leftCols(used).transpose() * v);
  }
}

}  // namespace

SimplsPath simpls_path(const Eigen::Ref<const Eigen::MatrixXd>& x,
                       const Eigen::Ref<const Eigen::MatrixXd>& y, int max_components) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::Index q = y.cols();
  if (y.rows() != n) {
    throw Error(ErrorKind::structural, "simpls: predictors have " + std::to_string(n) +
                                           " rows, responses " + std::to_string(y.rows()));
  }
  if (n < 2) throw Error(ErrorKind::structural, "simpls: need at least 2 observations");
  if (max_components < 1) throw Error(ErrorKind::spec, "simpls: component count must be >= 1");

  SimplsPath out;
  PlsModel& m = out.model;
  auto [x0m, xs] = center_normalize(DesignMatrix{x, {p, 1}}, NormalizeMode::center_only);
  auto [y0m, ys] = center_normalize(DesignMatrix{y, {q, 1}}, NormalizeMode::center_only);
  m.x_stats = std::move(xs);
  m.y_stats = std::move(ys);
  const Eigen::MatrixXd& x0 = x0m.values;
  const Eigen::MatrixXd& y0 = y0m.values;

  // S0 = X0^T Y0 = L Sigma V^T. Only the left factor scaled by Sigma matters
  // for left singular vectors of any projection P S0, and it is at most
  // p x min(N, p), which keeps every per-component SVD small.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x0.transpose());
  const Eigen::Index rdim = std::min(n, p);
  const Eigen::MatrixXd qx = qr.householderQ() * Eigen::MatrixXd::Identity(p, rdim);
  const Eigen::MatrixXd rx =
      qr.matrixQR().topRows(rdim).triangularView<Eigen::Upper>().toDenseMatrix();
  const Eigen::MatrixXd z = rx * y0;
  Eigen::BDCSVD<Eigen::MatrixXd> zsvd(z, Eigen::ComputeThinU);
  const Eigen::MatrixXd cross = qx * zsvd.matrixU() * zsvd.singularValues().asDiagonal();
  const double sigma1 = zsvd.singularValues().size() ? zsvd.singularValues()(0) : 0.0;

  const int limit = static_cast<int>(std::min<Eigen::Index>(n - 1, p));
  m.weights.resize(p, max_components);
  m.scores.resize(n, max_components);
  m.x_loadings.resize(p, max_components);
  Eigen::MatrixXd loading_basis(p, max_components);

  const double scale = std::max(x0.norm() * y0.norm(), std::numeric_limits<double>::min());
  int extracted = 0;
  for (int i = 1; i <= max_components; ++i) {
    if (i > limit) {
      out.failure = RankError(i, "simpls: component " + std::to_string(i) +
                                     " exceeds min(N-1, p) = " + std::to_string(limit));
      break;
    }
    if (i == 1 && !(sigma1 > 1e-14 * scale)) {
      out.failure = RankError(1, "simpls: predictor/response cross-covariance is zero");
      break;
    }
    // Deflated cross-product (I - C (C^T C)^-1 C^T) S0, represented through
    // an orthonormal basis of C.
    Eigen::MatrixXd deflated = cross;
    for (Eigen::Index c = 0; c < deflated.cols(); ++c) {
      orthogonalize_against(loading_basis, extracted, deflated.col(c));
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(deflated, Eigen::ComputeThinU);
    const double sigma = svd.singularValues()(0);
    if (!(sigma > kRankTolerance * sigma1)) {
      out.failure = RankError(i, "simpls: deflated cross-product vanished at component " +
                                     std::to_string(i));
      break;
    }
    Eigen::VectorXd r = svd.matrixU().col(0);
    orthogonalize_against(loading_basis, extracted, r);
    r.normalize();
    Eigen::Index arg = 0;
    r.cwiseAbs().maxCoeff(&arg);
    if (r(arg) < 0.0) r = -r;

    const Eigen::VectorXd t = x0 * r;
    const double tt = t.squaredNorm();
    if (!(tt > 0.0)) {
      out.failure = RankError(i, "simpls: score vector vanished at component " +
                                     std::to_string(i));
      break;
    }
    const Eigen::VectorXd c = x0.transpose() * t / tt;

    m.weights.col(extracted) = r;
    m.scores.col(extracted) = t;
    m.x_loadings.col(extracted) = c;
    Eigen::VectorXd basis_vec = c;
    orthogonalize_against(loading_basis, extracted, basis_vec);
    const double bn = basis_vec.norm();
    loading_basis.col(extracted) = bn > 0.0 ? Eigen::VectorXd(basis_vec / bn)
                                            : Eigen::VectorXd::Zero(p);
    ++extracted;
  }

  m.n_components = extracted;
  m.weights.conservativeResize(p, extracted);
  m.scores.conservativeResize(n, extracted);
  m.x_loadings.conservativeResize(p, extracted);
  m.score_response = m.scores.transpose() * y0;
  m.coefficients = extracted > 0 ? m.coefficients_for(extracted) : Eigen::MatrixXd::Zero(p, q);
  return out;
}

PlsModel simpls_fit(const Eigen::Ref<const Eigen::MatrixXd>& x,
                    const Eigen::Ref<const Eigen::MatrixXd>& y, int components) {
  const int limit = static_cast<int>(std::min<Eigen::Index>(x.rows() - 1, x.cols()));
  if (components > limit) {
    throw RankError(limit + 1, "simpls: " + std::to_string(components) +
                                   " components requested but min(N-1, p) = " +
                                   std::to_string(limit));
  }
  auto path = simpls_path(x, y, components);
  if (path.failure) throw *path.failure;
  return std::move(path.model);
}

Eigen::MatrixXd PlsModel::coefficients_for(int m) const {
  if (m < 1 || m > n_components) {
    throw Error(ErrorKind::out_of_range, "PlsModel: " + std::to_string(m) +
                                             " components requested, model has " +
                                             std::to_string(n_components));
  }
  const auto tm = scores.leftCols(m);
  const Eigen::MatrixXd tt = tm.transpose() * tm;
  // T^-1 in the coefficient formula is the pseudo-inverse (T^T T)^-1 T^T.
  return weights.leftCols(m) * tt.ldlt().solve(score_response.topRows(m));
}

Eigen::RowVectorXd PlsModel::predict_components(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                                int m) const {
  if (x.size() != weights.rows()) {
    throw Error(ErrorKind::structural, "predict: expected " + std::to_string(weights.rows()) +
                                           " predictors, got " + std::to_string(x.size()));
  }
  if (m < 1 || m > n_components) {
    throw Error(ErrorKind::out_of_range, "predict: " + std::to_string(m) +
                                             " components requested, model has " +
                                             std::to_string(n_components));
  }
  const auto tm = scores.leftCols(m);
  const Eigen::MatrixXd tt = tm.transpose() * tm;
  const Eigen::VectorXd latent = weights.leftCols(m).transpose() * (x - x_stats.column_means).transpose();
  const Eigen::VectorXd w = tt.ldlt().solve(latent);
  return y_stats.column_means + w.transpose() * score_response.topRows(m);
}

Eigen::RowVectorXd plsr_predict(const PlsModel& model,
                                const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  if (x.size() != model.coefficients.rows()) {
    throw Error(ErrorKind::structural, "plsr_predict: expected " +
                                           std::to_string(model.coefficients.rows()) +
                                           " predictors, got " + std::to_string(x.size()));
  }
  return (x - model.x_stats.column_means) * model.coefficients + model.y_stats.column_means;
}

}  // namespace shapeinst
