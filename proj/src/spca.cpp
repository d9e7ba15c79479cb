#include "shapeinst/spca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace shapeinst {

double spca_component_objective(const GramOperator& gram,
                                const Eigen::Ref<const Eigen::VectorXd>& alpha,
                                const Eigen::Ref<const Eigen::VectorXd>& beta, double lambda,
                                double lambda1) {
  const Eigen::VectorXd gb = gram.apply(beta);
  return gram.trace() - 2.0 * alpha.dot(gb) + beta.dot(gb) + lambda * beta.squaredNorm() +
         lambda1 * beta.lpNorm<1>();
}

namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v *= -1.0;
}

}  // namespace

SparseLoadings spca(const Eigen::Ref<const Eigen::MatrixXd>& y_norm, const SpcaConfig& cfg) {
  const Eigen::Index n = y_norm.rows();
  const Eigen::Index d = y_norm.cols();
  if (cfg.k < 1 || cfg.k > std::min<Eigen::Index>(n - 1, d)) {
    throw Error(ErrorKind::spec, "spca: k = " + std::to_string(cfg.k) + " must lie in [1, " +
                                     std::to_string(std::min<Eigen::Index>(n - 1, d)) + "]");
  }
  if (cfg.sparsity.empty()) throw Error(ErrorKind::spec, "spca: no sparsity setting given");
  if (cfg.max_iter < 1 || !(cfg.tol > 0.0)) {
    throw Error(ErrorKind::spec, "spca: max_iter must be positive and tol > 0");
  }

  const PcaResult init = pca(y_norm);
  if (init.singular_values.size() == 0 || init.singular_values(0) == 0.0) {
    throw Error(ErrorKind::numerical, "spca: data has zero variance");
  }
  const GramOperator gram = GramOperator::from_data(Eigen::MatrixXd(y_norm));

  SparseLoadings out;
  Eigen::MatrixXd a = init.loadings.leftCols(cfg.k);
  out.loadings = Eigen::MatrixXd::Zero(d, cfg.k);
  out.iterations.assign(static_cast<std::size_t>(cfg.k), 0);
  out.objective_trace.resize(static_cast<std::size_t>(cfg.k));

  for (int j = 0; j < cfg.k; ++j) {
    const Sparsity& sparsity =
        cfg.sparsity[std::min(static_cast<std::size_t>(j), cfg.sparsity.size() - 1)];
    Eigen::VectorXd alpha = a.col(j);
    bool converged = false;
    for (int it = 0; it < cfg.max_iter; ++it) {
      out.iterations[static_cast<std::size_t>(j)] = it + 1;
      const ElasticNetResult en = elastic_net(gram, alpha, cfg.ridge_lambda, sparsity);
      const double norm = en.beta.norm();
      if (norm == 0.0) {
        out.loadings.col(j).setZero();
        converged = true;
        break;
      }
      const Eigen::VectorXd beta = en.beta / norm;
      const double change = (beta - out.loadings.col(j)).norm();
      out.loadings.col(j) = beta;

      // alpha_j = (I - A_{1:j-1} A_{1:j-1}^T) G beta_j, normalized.
      Eigen::VectorXd next = gram.apply(beta);
      if (j > 0) {
        const auto prev = a.leftCols(j);
        next -= prev * (prev.transpose() * next);
      }
      const double next_norm = next.norm();
      if (next_norm > 0.0) alpha = next / next_norm;
      a.col(j) = alpha;
      out.objective_trace[static_cast<std::size_t>(j)].push_back(
          spca_component_objective(gram, alpha, en.beta, cfg.ridge_lambda, en.lambda1));

      if (change < cfg.tol) {
        converged = true;
        break;
      }
    }
    if (!converged) out.status = SpcaStatus::max_iter_reached;
    fix_sign(out.loadings.col(j));
  }

  out.support.resize(static_cast<std::size_t>(cfg.k));
  for (int j = 0; j < cfg.k; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (out.loadings(i, j) != 0.0) out.support[static_cast<std::size_t>(j)].push_back(i);
    }
  }
  return out;
}

VertexContribution vertex_contributions(const SparseLoadings& sl, int component_index) {
  const Eigen::Index d = sl.loadings.rows();
  if (d % 3 != 0) {
    throw Error(ErrorKind::structural, "vertex_contributions: loading length " +
                                           std::to_string(d) + " is not divisible by 3");
  }
  if (component_index < 0 || component_index >= sl.loadings.cols()) {
    throw Error(ErrorKind::out_of_range, "vertex_contributions: no component " +
                                             std::to_string(component_index));
  }
  VertexContribution vc;
  vc.contributions.resize(d / 3);
  for (Eigen::Index v = 0; v < d / 3; ++v) {
    vc.contributions(v) = std::abs(sl.loadings(3 * v, component_index)) +
                          std::abs(sl.loadings(3 * v + 1, component_index)) +
                          std::abs(sl.loadings(3 * v + 2, component_index));
    if (vc.contributions(v) > 0.0) vc.selected.push_back(v);
  }
  return vc;
}

Eigen::Index default_sparsity_target(Eigen::Index num_vertices) {
  return std::max<Eigen::Index>(3, static_cast<Eigen::Index>(std::lround(0.05 * num_vertices)));
}

VertexContribution thresholded_pca_contributions(const PcaResult& p, int component_index,
                                                 Eigen::Index count) {
  const Eigen::Index d = p.loadings.rows();
  if (d % 3 != 0) {
    throw Error(ErrorKind::structural, "thresholded_pca_contributions: length not divisible by 3");
  }
  const Eigen::Index nv = d / 3;
  Eigen::VectorXd dense(nv);
  for (Eigen::Index v = 0; v < nv; ++v) {
    dense(v) = p.loadings.col(component_index).segment(3 * v, 3).cwiseAbs().sum();
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(nv));
  std::iota(order.begin(), order.end(), 0);
  const auto keep = std::min(count, nv);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return dense(x) > dense(y); });
  VertexContribution vc;
  vc.contributions = Eigen::VectorXd::Zero(nv);
  for (Eigen::Index r = 0; r < keep; ++r) {
    const auto v = order[static_cast<std::size_t>(r)];
    vc.contributions(v) = dense(v);
  }
  for (Eigen::Index v = 0; v < nv; ++v) {
    if (vc.contributions(v) > 0.0) vc.selected.push_back(v);
  }
  return vc;
}

}  // namespace shapeinst
