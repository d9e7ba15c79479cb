#include "shapeinst/regress.hpp"

#include <cmath>
#include <string>

namespace shapeinst {

KernelMatrix gaussian_kernel(const Eigen::Ref<const Eigen::MatrixXd>& rows, double ratio,
                             Execution ex) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw Error(ErrorKind::spec, "gaussian_kernel: ratio must be positive and finite");
  }
  KernelMatrix out;
  out.config.ratio = ratio;
  const Eigen::MatrixXd sq = kernels::pairwise_sq_distances(rows, ex);
  const double max_sq = sq.size() ? sq.maxCoeff() : 0.0;
  if (max_sq == 0.0) {
    out.config.width = 0.0;
    out.k_space = Eigen::MatrixXd::Ones(rows.rows(), rows.rows());
    return out;
  }
  out.config.width = ratio * max_sq;
  out.k_space = (-sq.array() / out.config.width).exp().matrix();
  return out;
}

Eigen::RowVectorXd kernel_row(const KplsrModel& model,
                              const Eigen::Ref<const Eigen::RowVectorXd>& x, Execution ex) {
  if (x.size() != model.training_rows.cols()) {
    throw Error(ErrorKind::structural, "kplsr: expected " +
                                           std::to_string(model.training_rows.cols()) +
                                           " predictors, got " + std::to_string(x.size()));
  }
  const Eigen::VectorXd sq = kernels::sq_distances_to(model.training_rows, x, ex);
  Eigen::RowVectorXd k(sq.size());
  if (model.kernel.width == 0.0) {
    for (Eigen::Index i = 0; i < sq.size(); ++i) k(i) = sq(i) == 0.0 ? 1.0 : 0.0;
  } else {
    k = (-sq.array() / model.kernel.width).exp().matrix().transpose();
  }
  return k;
}

KplsrPath kplsr_path(const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const Eigen::Ref<const Eigen::MatrixXd>& y, int max_components,
                     double ratio) {
  KernelMatrix km = gaussian_kernel(x, ratio);
  auto inner = simpls_path(km.k_space, y, max_components);
  KplsrPath out;
  out.model.training_rows = x;
  out.model.kernel = km.config;
  out.model.kernel_column_means = inner.model.x_stats.column_means;
  out.model.inner = std::move(inner.model);
  out.failure = std::move(inner.failure);
  return out;
}

KplsrModel kplsr_fit(const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const Eigen::Ref<const Eigen::MatrixXd>& y, int components, double ratio) {
  const int limit = static_cast<int>(x.rows()) - 1;
  if (components > limit) {
    throw RankError(limit + 1, "kplsr: " + std::to_string(components) +
                                   " components requested but N-1 = " + std::to_string(limit));
  }
  auto path = kplsr_path(x, y, components, ratio);
  if (path.failure) throw *path.failure;
  return std::move(path.model);
}

Eigen::RowVectorXd kplsr_predict(const KplsrModel& model,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return plsr_predict(model.inner, kernel_row(model, x));
}

const char* to_string(RegressorKind kind) {
  return kind == RegressorKind::plsr ? "plsr" : "kplsr";
}

RegressorKind regressor_from_string(const std::string& s) {
  if (s == "plsr") return RegressorKind::plsr;
  if (s == "kplsr") return RegressorKind::kplsr;
  throw Error(ErrorKind::spec, "unknown regressor '" + s + "' (expected plsr or kplsr)");
}

Eigen::Index RegressionModel::num_predictors() const {
  return kind() == RegressorKind::kplsr ? kplsr().training_rows.cols()
                                        : pls().num_predictors();
}

Eigen::RowVectorXd RegressionModel::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (kind() == RegressorKind::kplsr) return kplsr_predict(kplsr(), x);
  return plsr_predict(pls(), x);
}

Eigen::RowVectorXd RegressionModel::predict_components(
    const Eigen::Ref<const Eigen::RowVectorXd>& x, int m) const {
  if (kind() == RegressorKind::kplsr) {
    return kplsr().inner.predict_components(kernel_row(kplsr(), x), m);
  }
  return pls().predict_components(x, m);
}

RegressionModel fit_regressor(const Eigen::Ref<const Eigen::MatrixXd>& x,
                              const Eigen::Ref<const Eigen::MatrixXd>& y,
                              const RegressorConfig& cfg) {
  if (cfg.kind == RegressorKind::kplsr) {
    return RegressionModel(kplsr_fit(x, y, cfg.components, cfg.ratio));
  }
  return RegressionModel(simpls_fit(x, y, cfg.components));
}

RegressorPath fit_regressor_path(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                 const Eigen::Ref<const Eigen::MatrixXd>& y, RegressorKind kind,
                                 int max_components, double ratio) {
  RegressorPath out;
  if (kind == RegressorKind::kplsr) {
    auto p = kplsr_path(x, y, max_components, ratio);
    out.model = RegressionModel(std::move(p.model));
    out.failure = std::move(p.failure);
  } else {
    auto p = simpls_path(x, y, max_components);
    out.model = RegressionModel(std::move(p.model));
    out.failure = std::move(p.failure);
  }
  return out;
}

}  // namespace shapeinst
