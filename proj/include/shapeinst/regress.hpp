#pragma once

#include <optional>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "shapeinst/kernels.hpp"
#include "shapeinst/ssm.hpp"

namespace shapeinst {

/// SIMPLS model. Predictors and responses are centered only.
struct PlsModel {
  int n_components = 0;
  NormalizationStats x_stats;
  NormalizationStats y_stats;
  Eigen::MatrixXd weights;     // R, p x M, unit columns
  Eigen::MatrixXd scores;      // T, N x M, mutually orthogonal
  Eigen::MatrixXd x_loadings;  // C, p x M
  Eigen::MatrixXd coefficients;  // B, p x q
  // T^T Y0 (M x q); with T^T T this rebuilds B for any leading subset.
  Eigen::MatrixXd score_response;

  Eigen::Index num_predictors() const { return weights.rows(); }
  Eigen::Index num_responses() const { return coefficients.cols(); }

  /// B built from the first m components: R_m (T_m^T T_m)^-1 T_m^T Y0.
  Eigen::MatrixXd coefficients_for(int m) const;
  /// Prediction through the first m components, via the latent scores.
  Eigen::RowVectorXd predict_components(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                        int m) const;
};

/// Components that could be extracted before the cross-product ran out of
/// rank. `model.n_components` may be below the request; `failure` says why.
struct SimplsPath {
  PlsModel model;
  std::optional<RankError> failure;
};

/// Fits up to `max_components`, stopping early instead of throwing.
SimplsPath simpls_path(const Eigen::Ref<const Eigen::MatrixXd>& x,
                       const Eigen::Ref<const Eigen::MatrixXd>& y, int max_components);

/// Throws RankError when M exceeds min(N-1, p) or the deflated cross-product
/// vanishes before M components.
PlsModel simpls_fit(const Eigen::Ref<const Eigen::MatrixXd>& x,
                    const Eigen::Ref<const Eigen::MatrixXd>& y, int components);

/// y = (x - x_means) B + y_means
Eigen::RowVectorXd plsr_predict(const PlsModel& model,
                                const Eigen::Ref<const Eigen::RowVectorXd>& x);

struct KernelConfig {
  double ratio = 1.0;
  double width = 0.0;  // ratio * max squared distance; 0 when all rows coincide
};

struct KernelMatrix {
  Eigen::MatrixXd k_space;  // exp(-K / W)
  KernelConfig config;
};

/// Gaussian kernel with width W = ratio * max_ij |x_i - x_j|^2. When every row
/// is identical the kernel is all ones.
KernelMatrix gaussian_kernel(const Eigen::Ref<const Eigen::MatrixXd>& rows, double ratio,
                             Execution ex = Execution::parallel);

struct KplsrModel {
  Eigen::MatrixXd training_rows;  // uncentered predictors, N x p
  KernelConfig kernel;
  Eigen::RowVectorXd kernel_column_means;
  PlsModel inner;  // fitted on K_space; its predictor count is N
};

/// Kernel row of a new predictor against the stored training rows.
Eigen::RowVectorXd kernel_row(const KplsrModel& model,
                              const Eigen::Ref<const Eigen::RowVectorXd>& x,
                              Execution ex = Execution::serial);

struct KplsrPath {
  KplsrModel model;
  std::optional<RankError> failure;
};

KplsrPath kplsr_path(const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const Eigen::Ref<const Eigen::MatrixXd>& y, int max_components, double ratio);
KplsrModel kplsr_fit(const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const Eigen::Ref<const Eigen::MatrixXd>& y, int components, double ratio);
Eigen::RowVectorXd kplsr_predict(const KplsrModel& model,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& x);

enum class RegressorKind { plsr, kplsr };

const char* to_string(RegressorKind kind);
RegressorKind regressor_from_string(const std::string& s);

struct RegressorConfig {
  RegressorKind kind = RegressorKind::kplsr;
  int components = 1;
  double ratio = 1.0;  // KPLSR only
};

/// Either fitted model behind one predict call.
class RegressionModel {
 public:
  RegressionModel() = default;
  explicit RegressionModel(PlsModel m) : model_(std::move(m)) {}
  explicit RegressionModel(KplsrModel m) : model_(std::move(m)) {}

  RegressorKind kind() const {
    return std::holds_alternative<KplsrModel>(model_) ? RegressorKind::kplsr
                                                      : RegressorKind::plsr;
  }
  const PlsModel& pls() const { return std::get<PlsModel>(model_); }
  const KplsrModel& kplsr() const { return std::get<KplsrModel>(model_); }
  const PlsModel& inner() const {
    return kind() == RegressorKind::kplsr ? kplsr().inner : pls();
  }
  Eigen::Index num_predictors() const;
  Eigen::Index num_responses() const { return inner().num_responses(); }

  Eigen::RowVectorXd predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  /// Prediction restricted to the first m components (m <= fitted count).
  Eigen::RowVectorXd predict_components(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                        int m) const;

 private:
  std::variant<PlsModel, KplsrModel> model_;
};

RegressionModel fit_regressor(const Eigen::Ref<const Eigen::MatrixXd>& x,
                              const Eigen::Ref<const Eigen::MatrixXd>& y,
                              const RegressorConfig& cfg);

struct RegressorPath {
  RegressionModel model;
  std::optional<RankError> failure;
};

/// Fits the largest requested component count once; smaller counts are read
/// off the same path (component extraction is nested).
RegressorPath fit_regressor_path(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                 const Eigen::Ref<const Eigen::MatrixXd>& y, RegressorKind kind,
                                 int max_components, double ratio);

}  // namespace shapeinst
