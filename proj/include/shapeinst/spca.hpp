#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "shapeinst/ssm.hpp"

namespace shapeinst {

struct PcaResult {
  Eigen::MatrixXd components;       // N x r, Z = U D
  Eigen::MatrixXd loadings;         // d x r, V
  Eigen::VectorXd singular_values;  // r, descending
};

/// Thin SVD of a centered design matrix. Each loading column is signed so its
/// largest-magnitude entry is positive.
PcaResult pca(const Eigen::Ref<const Eigen::MatrixXd>& y_norm);

/// Y^T Y + ridge * I, either held explicitly (d x d) or applied through the
/// N x d data matrix so nothing of size d x d is formed.
class GramOperator {
 public:
  /// Throws Error(structural) unless `gram` is square and symmetric.
  static GramOperator from_gram(Eigen::MatrixXd gram);
  static GramOperator from_data(Eigen::MatrixXd y);

  Eigen::Index dim() const { return dim_; }
  /// G v
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  /// G(:, j)
  Eigen::VectorXd column(Eigen::Index j) const;
  /// G(i, j)
  double entry(Eigen::Index i, Eigen::Index j) const;
  double trace() const;

 private:
  Eigen::MatrixXd gram_;  // set in explicit mode
  Eigen::MatrixXd data_;  // set in factored mode
  Eigen::Index dim_ = 0;
  bool explicit_ = false;
};

/// Penalty on the l1 term, or a cap on the number of non-zeros.
struct L1Penalty {
  double value = 0.0;
};
struct NonzeroTarget {
  Eigen::Index count = 0;
};
using Sparsity = std::variant<L1Penalty, NonzeroTarget>;

struct ElasticNetResult {
  Eigen::VectorXd beta;
  // Effective l1 penalty at the returned point of the path.
  double lambda1 = 0.0;
  int steps = 0;
};

/// argmin_b (a - b)^T G (a - b) + lambda |b|^2 + lambda1 |b|_1, solved by
/// LARS with the lasso modification on the ridge-augmented Gram matrix. In
/// NonzeroTarget mode the path stops at the last knot whose active set does not
/// exceed the target.
ElasticNetResult elastic_net(const GramOperator& gram,
                             const Eigen::Ref<const Eigen::VectorXd>& target_alpha,
                             double lambda, const Sparsity& sparsity);

struct SpcaConfig {
  int k = 1;
  double ridge_lambda = 1e-4;
  // One entry per component; a single entry is reused for every component.
  std::vector<Sparsity> sparsity;
  int max_iter = 200;
  double tol = 1e-6;
};

enum class SpcaStatus { converged, max_iter_reached };

struct SparseLoadings {
  Eigen::MatrixXd loadings;  // d x k, unit columns unless all-zero
  std::vector<std::vector<Eigen::Index>> support;
  SpcaStatus status = SpcaStatus::converged;
  std::vector<int> iterations;
  // Per component: value of the alternating objective after each iteration.
  std::vector<std::vector<double>> objective_trace;
};

/// Alternating sparse PCA: initialise alpha from the PCA loadings, then
/// repeat elastic-net beta steps and projected alpha updates per component.
SparseLoadings spca(const Eigen::Ref<const Eigen::MatrixXd>& y_norm, const SpcaConfig& cfg);

/// The per-component objective the alternation decreases:
/// tr(G) - 2 a^T G b + b^T G b + lambda |b|^2 + lambda1 |b|_1.
double spca_component_objective(const GramOperator& gram,
                                const Eigen::Ref<const Eigen::VectorXd>& alpha,
                                const Eigen::Ref<const Eigen::VectorXd>& beta,
                                double lambda, double lambda1);

struct VertexContribution {
  Eigen::VectorXd contributions;   // numY, sum of |loading| over x, y, z
  std::vector<Eigen::Index> selected;  // contributions > 0
};

VertexContribution vertex_contributions(const SparseLoadings& sl, int component_index);

/// Default non-zero target: 5% of the vertex count, at least 3.
Eigen::Index default_sparsity_target(Eigen::Index num_vertices);

/// Baseline for the informative-vertex comparison: keep the `count` vertices
/// with the largest dense PCA contribution.
VertexContribution thresholded_pca_contributions(const PcaResult& pca, int component_index,
                                                 Eigen::Index count);

}  // namespace shapeinst
