#include "shapeinst/validate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>

namespace shapeinst {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd drop_row(const Eigen::MatrixXd& m, Eigen::Index row) {
  Eigen::MatrixXd out(m.rows() - 1, m.cols());
  if (row > 0) out.topRows(row) = m.topRows(row);
  if (row + 1 < m.rows()) out.bottomRows(m.rows() - row - 1) = m.bottomRows(m.rows() - row - 1);
  return out;
}

struct Problem {
  Eigen::MatrixXd x;  // N x p
  Eigen::MatrixXd y;  // N x q
};

Problem make_problem(const ShapeSequence3D& ssm3d, const ContourSequence2D& ssm2d) {
  if (ssm3d.num_frames() != ssm2d.num_frames()) {
    throw Error(ErrorKind::structural, "loocv: 3D sequence has " +
                                           std::to_string(ssm3d.num_frames()) +
                                           " frames, 2D sequence " +
                                           std::to_string(ssm2d.num_frames()));
  }
  if (ssm3d.num_frames() < 3) {
    throw Error(ErrorKind::structural, "loocv: need at least 3 frames");
  }
  return {flatten(ssm2d).values, flatten(ssm3d).values};
}

// Runs `body(i)` for every fold, in parallel when asked. Bodies write only
// to their own slot, so the outcome does not depend on scheduling.
template <typename Body>
void for_each_fold(long n, Execution ex, Body&& body) {
  if (ex == Execution::serial) {
    for (long i = 0; i < n; ++i) body(i);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) body(i);
  }
}

double fold_error(const RegressionModel& model, const Problem& pb, Eigen::Index i,
                  std::optional<int> components) {
  const Eigen::RowVectorXd pred = components ? model.predict_components(pb.x.row(i), *components)
                                             : model.predict(pb.x.row(i));
  return mean_distance_error(unflatten_row(pred, 3), unflatten_row(pb.y.row(i), 3));
}

// A training set whose targets never move leaves nothing to regress; the
// regressors raise a rank error there, but the prediction is simply that
// constant shape.
bool constant_target(const Eigen::MatrixXd& y) {
  return ((y.rowwise() - y.row(0)).array() == 0.0).all();
}

double constant_fold_error(const Eigen::MatrixXd& train_y, const Problem& pb, Eigen::Index i) {
  return mean_distance_error(unflatten_row(train_y.row(0), 3), unflatten_row(pb.y.row(i), 3));
}

void fill_variations(const ShapeSequence3D& ssm3d, LoocvReport& r) {
  const std::size_t n = ssm3d.num_frames();
  r.shape_variations.assign(n, kNaN);
  r.one_sided_variations.assign(n, kNaN);
  r.boundary_frames.clear();
  for (std::size_t t = 0; t < n; ++t) {
    if (t == 0 || t + 1 == n) {
      r.one_sided_variations[t] = one_sided_variation(ssm3d, t);
      r.boundary_frames.push_back(t);
    } else {
      r.shape_variations[t] = shape_variation(ssm3d, t);
    }
  }
}

}  // namespace

double LoocvReport::mean_error() const {
  double acc = 0.0;
  std::size_t cnt = 0;
  for (double e : per_frame_errors) {
    if (std::isfinite(e)) {
      acc += e;
      ++cnt;
    }
  }
  return cnt ? acc / static_cast<double>(cnt) : kNaN;
}

std::size_t LoocvReport::failed_folds() const {
  std::size_t n = 0;
  for (const auto& f : failures) n += f.empty() ? 0 : 1;
  return n;
}

std::string config_label(const RegressorConfig& cfg) {
  std::string s = std::string(to_string(cfg.kind)) + "(M=" + std::to_string(cfg.components);
  if (cfg.kind == RegressorKind::kplsr) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), ", ratio=%g", cfg.ratio);
    s += buf;
  }
  return s + ")";
}

LoocvReport loocv(const ShapeSequence3D& ssm3d, const ContourSequence2D& ssm2d,
                  const RegressorConfig& cfg, Execution ex) {
  const Problem pb = make_problem(ssm3d, ssm2d);
  const auto n = static_cast<long>(pb.x.rows());
  LoocvReport r;
  r.config = cfg;
  r.per_frame_errors.assign(static_cast<std::size_t>(n), kNaN);
  r.failures.assign(static_cast<std::size_t>(n), "");
  r.fold_configs.assign(static_cast<std::size_t>(n), cfg);

  for_each_fold(n, ex, [&](long i) {
    const auto ui = static_cast<std::size_t>(i);
    try {
      // Training structures hold N-1 rows: the held-out frame never enters.
      const Eigen::MatrixXd train_y = drop_row(pb.y, i);
      if (constant_target(train_y)) {
        r.per_frame_errors[ui] = constant_fold_error(train_y, pb, i);
        return;
      }
      const auto model = fit_regressor(drop_row(pb.x, i), train_y, cfg);
      r.per_frame_errors[ui] = fold_error(model, pb, i, std::nullopt);
    } catch (const Error& e) {
      r.failures[ui] = e.what();
    }
  });
  fill_variations(ssm3d, r);
  return r;
}

ComponentSweep sweep_components(const ShapeSequence3D& ssm3d, const ContourSequence2D& ssm2d,
                                RegressorKind kind, int min_components, int max_components,
                                double ratio, Execution ex) {
  if (min_components < 1 || max_components < min_components) {
    throw Error(ErrorKind::spec, "sweep_components: invalid component range");
  }
  const Problem pb = make_problem(ssm3d, ssm2d);
  const auto n = static_cast<long>(pb.x.rows());
  const auto nm = static_cast<std::size_t>(max_components - min_components + 1);

  ComponentSweep out;
  out.grid.study = "components";
  GridAxis comp_axis{"components", {}};
  for (int m = min_components; m <= max_components; ++m) comp_axis.labels.push_back(std::to_string(m));
  GridAxis frame_axis{"frame", {}};
  for (long i = 0; i < n; ++i) frame_axis.labels.push_back(std::to_string(i));
  out.grid.axes = {comp_axis, frame_axis};
  out.grid.values.assign(nm * static_cast<std::size_t>(n), kNaN);
  std::vector<std::vector<std::string>> fold_notes(static_cast<std::size_t>(n));

  for_each_fold(n, ex, [&](long i) {
    const auto ui = static_cast<std::size_t>(i);
    try {
      const auto path =
          fit_regressor_path(drop_row(pb.x, i), drop_row(pb.y, i), kind, max_components, ratio);
      const int available = path.model.inner().n_components;
      for (int m = min_components; m <= max_components; ++m) {
        const auto cell = static_cast<std::size_t>(m - min_components) * static_cast<std::size_t>(n) + ui;
        if (m <= available) {
          out.grid.values[cell] = fold_error(path.model, pb, i, m);
        } else if (m == available + 1 && path.failure) {
          fold_notes[ui].push_back("frame " + std::to_string(i) + ", M=" + std::to_string(m) +
                                   ": " + path.failure->what());
        }
      }
    } catch (const Error& e) {
      fold_notes[ui].push_back("frame " + std::to_string(i) + ": " + e.what());
    }
  });
  for (auto& notes : fold_notes) {
    for (auto& s : notes) out.grid.notes.push_back(std::move(s));
  }

  out.frame_mean.assign(static_cast<std::size_t>(n), kNaN);
  out.frame_std.assign(static_cast<std::size_t>(n), kNaN);
  for (long i = 0; i < n; ++i) {
    double sum = 0.0, sq = 0.0;
    int cnt = 0;
    for (std::size_t m = 0; m < nm; ++m) {
      const double v = out.grid.values[m * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
      if (!std::isfinite(v)) continue;
      sum += v;
      ++cnt;
    }
    if (cnt == 0) continue;
    const double mean = sum / cnt;
    for (std::size_t m = 0; m < nm; ++m) {
      const double v = out.grid.values[m * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
      if (std::isfinite(v)) sq += (v - mean) * (v - mean);
    }
    out.frame_mean[static_cast<std::size_t>(i)] = mean;
    out.frame_std[static_cast<std::size_t>(i)] = std::sqrt(sq / cnt);
  }
  LoocvReport tmp;
  fill_variations(ssm3d, tmp);
  out.shape_variations = tmp.shape_variations;
  return out;
}

std::vector<double> default_ratio_grid() { return {0.1, 0.3, 1.0, 3.0, 10.0}; }

SearchSpace default_search(RegressorKind kind) {
  SearchSpace s;
  s.kind = kind;
  s.min_components = 1;
  s.max_components = kind == RegressorKind::plsr ? 8 : 18;
  s.ratios = kind == RegressorKind::plsr ? std::vector<double>{1.0} : default_ratio_grid();
  return s;
}

Selection select_config(const ShapeSequence3D& ssm3d, const ContourSequence2D& ssm2d,
                        const SearchSpace& space, Execution ex) {
  Selection sel;
  sel.best_mean_error = std::numeric_limits<double>::infinity();
  bool found = false;
  const std::vector<double> ratios =
      space.kind == RegressorKind::plsr ? std::vector<double>{1.0} : space.ratios;
  const auto n = ssm3d.num_frames();
  for (double ratio : ratios) {
    const auto sweep = sweep_components(ssm3d, ssm2d, space.kind, space.min_components,
                                        space.max_components, ratio, ex);
    for (int m = space.min_components; m <= space.max_components; ++m) {
      double sum = 0.0;
      bool complete = true;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = sweep.grid.at({static_cast<std::size_t>(m - space.min_components), i});
        if (!std::isfinite(v)) {
          complete = false;
          break;
        }
        sum += v;
      }
      if (!complete) continue;
      const double mean = sum / static_cast<double>(n);
      if (mean < sel.best_mean_error ||
          (found && mean == sel.best_mean_error && m < sel.best.components)) {
        sel.best_mean_error = mean;
        sel.best = RegressorConfig{space.kind, m, ratio};
        found = true;
      }
    }
  }
  if (!found) {
    throw Error(ErrorKind::rank, "select_config: no configuration completed every fold");
  }
  return sel;
}

LoocvReport loocv_nested(const ShapeSequence3D& ssm3d, const ContourSequence2D& ssm2d,
                         const SearchSpace& space, Execution ex) {
  const Problem pb = make_problem(ssm3d, ssm2d);
  const auto n = static_cast<long>(pb.x.rows());
  if (n < 4) throw Error(ErrorKind::structural, "loocv_nested: need at least 4 frames");
  LoocvReport r;
  r.config = RegressorConfig{space.kind, space.min_components,
                             space.ratios.empty() ? 1.0 : space.ratios.front()};
  r.per_frame_errors.assign(static_cast<std::size_t>(n), kNaN);
  r.failures.assign(static_cast<std::size_t>(n), "");
  r.fold_configs.assign(static_cast<std::size_t>(n), r.config);

  for_each_fold(n, ex, [&](long i) {
    const auto ui = static_cast<std::size_t>(i);
    try {
      std::vector<Frame3> f3;
      std::vector<Frame2> f2;
      for (long t = 0; t < n; ++t) {
        if (t == i) continue;
        f3.push_back(ssm3d.frame(static_cast<std::size_t>(t)));
        f2.push_back(ssm2d.frame(static_cast<std::size_t>(t)));
      }
      const ShapeSequence3D train3(std::move(f3), ssm3d.triangles());
      const ContourSequence2D train2(std::move(f2), ssm2d.closed());
      // Inner folds run serially; the outer loop already owns the threads.
      const auto sel = select_config(train3, train2, space, Execution::serial);
      r.fold_configs[ui] = sel.best;
      const auto model = fit_regressor(drop_row(pb.x, i), drop_row(pb.y, i), sel.best);
      r.per_frame_errors[ui] = fold_error(model, pb, i, std::nullopt);
    } catch (const Error& e) {
      r.failures[ui] = e.what();
    }
  });
  fill_variations(ssm3d, r);
  return r;
}

}  // namespace shapeinst
