#include "shapeinst/spca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace shapeinst {

GramOperator GramOperator::from_gram(Eigen::MatrixXd gram) {
  if (gram.rows() != gram.cols()) {
    throw Error(ErrorKind::structural, "gram matrix must be square, got " +
                                           std::to_string(gram.rows()) + "x" +
                                           std::to_string(gram.cols()));
  }
  const double scale = std::max(gram.cwiseAbs().maxCoeff(), 1.0);
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorKind::structural, "gram matrix is not symmetric");
  }
  GramOperator op;
  op.dim_ = gram.rows();
  op.gram_ = std::move(gram);
  op.explicit_ = true;
  return op;
}

GramOperator GramOperator::from_data(Eigen::MatrixXd y) {
  GramOperator op;
  op.dim_ = y.cols();
  op.data_ = std::move(y);
  op.explicit_ = false;
  return op;
}

Eigen::VectorXd GramOperator::apply(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (explicit_) return gram_ * v;
  const Eigen::VectorXd yv = data_ * v;
  return data_.transpose() * yv;
}

Eigen::VectorXd GramOperator::column(Eigen::Index j) const {
  if (explicit_) return gram_.col(j);
  return data_.transpose() * data_.col(j);
}

double GramOperator::entry(Eigen::Index i, Eigen::Index j) const {
  if (explicit_) return gram_(i, j);
  return data_.col(i).dot(data_.col(j));
}

double GramOperator::trace() const {
  if (explicit_) return gram_.trace();
  return data_.squaredNorm();
}

namespace {

struct ActiveSet {
  std::vector<Eigen::Index> index;
  Eigen::MatrixXd h;  // (G + lambda I) restricted to the active set

  void add(const GramOperator& g, double lambda, Eigen::Index j) {
    const auto m = static_cast<Eigen::Index>(index.size());
    Eigen::MatrixXd grown(m + 1, m + 1);
    grown.topLeftCorner(m, m) = h;
    for (Eigen::Index a = 0; a < m; ++a) {
      const double v = g.entry(index[static_cast<std::size_t>(a)], j);
      grown(a, m) = v;
      grown(m, a) = v;
    }
    grown(m, m) = g.entry(j, j) + lambda;
    h = std::move(grown);
    index.push_back(j);
  }

  void remove_at(Eigen::Index pos) {
    const auto m = static_cast<Eigen::Index>(index.size());
    Eigen::MatrixXd shrunk(m - 1, m - 1);
    for (Eigen::Index r = 0, rr = 0; r < m; ++r) {
      if (r == pos) continue;
      for (Eigen::Index c = 0, cc = 0; c < m; ++c) {
        if (c == pos) continue;
        shrunk(rr, cc++) = h(r, c);
      }
      ++rr;
    }
    h = std::move(shrunk);
    index.erase(index.begin() + pos);
  }
};

}  // namespace

ElasticNetResult elastic_net(const GramOperator& gram,
                             const Eigen::Ref<const Eigen::VectorXd>& target_alpha,
                             double lambda, const Sparsity& sparsity) {
  const Eigen::Index d = gram.dim();
  if (target_alpha.size() != d) {
    throw Error(ErrorKind::structural, "elastic_net: alpha has length " +
                                           std::to_string(target_alpha.size()) +
                                           ", gram is " + std::to_string(d));
  }
  if (!(lambda >= 0.0)) throw Error(ErrorKind::spec, "elastic_net: ridge lambda must be >= 0");

  // Stationarity: G a - (G + lambda I) b = (lambda1 / 2) sign(b). LARS walks
  // the path in the common correlation level `level` = lambda1 / 2.
  double stop_level = 0.0;
  Eigen::Index max_active = d;
  if (const auto* pen = std::get_if<L1Penalty>(&sparsity)) {
    if (!(pen->value >= 0.0)) throw Error(ErrorKind::spec, "elastic_net: lambda1 must be >= 0");
    stop_level = 0.5 * pen->value;
  } else {
    max_active = std::min(std::get<NonzeroTarget>(sparsity).count, d);
    if (max_active < 0) throw Error(ErrorKind::spec, "elastic_net: negative non-zero target");
  }

  ElasticNetResult res;
  res.beta = Eigen::VectorXd::Zero(d);
  const Eigen::VectorXd b = gram.apply(target_alpha);
  Eigen::VectorXd corr = b;

  Eigen::Index first = 0;
  double level = corr.cwiseAbs().maxCoeff(&first);
  res.lambda1 = 2.0 * level;
  if (max_active == 0 || level <= stop_level || level == 0.0) {
    if (std::holds_alternative<L1Penalty>(sparsity)) {
      res.lambda1 = std::get<L1Penalty>(sparsity).value;
    }
    return res;
  }

  const double eps = 1e-12 * level;
  std::vector<char> in_active(static_cast<std::size_t>(d), 0);
  ActiveSet act;
  auto activate = [&](Eigen::Index j) {
    act.add(gram, lambda, j);
    in_active[static_cast<std::size_t>(j)] = 1;
  };
  // Exactly tied variables (duplicated columns) reach the active level
  // together; the step rule would never pick them up since their step is 0.
  Eigen::Index just_dropped = -1;
  auto activate_ties = [&]() {
    const double bar = level * (1.0 - 1e-10);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (static_cast<Eigen::Index>(act.index.size()) >= max_active) return;
      if (j == just_dropped || in_active[static_cast<std::size_t>(j)]) continue;
      if (std::abs(corr(j)) >= bar) activate(j);
    }
  };
  activate(first);
  activate_ties();

  const int max_steps = static_cast<int>(std::min<Eigen::Index>(20 * d + 1000, 200000));
  for (int step = 0; step < max_steps; ++step) {
    res.steps = step + 1;
    const auto m = static_cast<Eigen::Index>(act.index.size());
    Eigen::VectorXd sign(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      sign(a) = corr(act.index[static_cast<std::size_t>(a)]) >= 0.0 ? 1.0 : -1.0;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(act.h);
    if (ldlt.info() != Eigen::Success) break;
    const Eigen::VectorXd w = ldlt.solve(sign);
    if (!w.allFinite()) break;

    Eigen::VectorXd w_full = Eigen::VectorXd::Zero(d);
    for (Eigen::Index a = 0; a < m; ++a) w_full(act.index[static_cast<std::size_t>(a)]) = w(a);
    const Eigen::VectorXd dir = gram.apply(w_full) + lambda * w_full;

    // Step until the level reaches the stop point, an inactive variable ties
    // the active correlation, or an active coefficient crosses zero.
    double delta = level - stop_level;
    enum class Event { end, add, drop } event = Event::end;
    Eigen::Index event_index = -1;

    for (Eigen::Index j = 0; j < d; ++j) {
      if (in_active[static_cast<std::size_t>(j)]) continue;
      const double denom_pos = 1.0 - dir(j);
      const double denom_neg = 1.0 + dir(j);
      if (denom_pos > 1e-14) {
        const double g = (level - corr(j)) / denom_pos;
        if (g > eps && g < delta) {
          delta = g;
          event = Event::add;
          event_index = j;
        }
      }
      if (denom_neg > 1e-14) {
        const double g = (level + corr(j)) / denom_neg;
        if (g > eps && g < delta) {
          delta = g;
          event = Event::add;
          event_index = j;
        }
      }
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      const Eigen::Index j = act.index[static_cast<std::size_t>(a)];
      if (w(a) == 0.0) continue;
      const double g = -res.beta(j) / w(a);
      if (g > eps && g < delta) {
        delta = g;
        event = Event::drop;
        event_index = a;
      }
    }

    res.beta += delta * w_full;
    level -= delta;
    // Refresh correlations from scratch to keep rounding from accumulating.
    corr = b - gram.apply(res.beta) - lambda * res.beta;

    if (event == Event::end) break;
    if (event == Event::drop) {
      const Eigen::Index j = act.index[static_cast<std::size_t>(event_index)];
      res.beta(j) = 0.0;
      in_active[static_cast<std::size_t>(j)] = 0;
      act.remove_at(event_index);
      just_dropped = j;
      if (act.index.empty()) break;
      continue;
    }
    if (static_cast<Eigen::Index>(act.index.size()) >= max_active) break;
    activate(event_index);
    activate_ties();
    just_dropped = -1;
  }
  res.lambda1 = 2.0 * std::max(level, 0.0);
  if (const auto* pen = std::get_if<L1Penalty>(&sparsity); pen && level <= stop_level + eps) {
    res.lambda1 = pen->value;
  }
  return res;
}

}  // namespace shapeinst
