#include "shapeinst/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>
#include <string>

namespace shapeinst {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

GridAxis frame_axis(std::size_t n) {
  GridAxis a{"frame", {}};
  for (std::size_t i = 0; i < n; ++i) a.labels.push_back(std::to_string(i));
  return a;
}

std::string perturbation_label(const PlanePerturbation& d) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "(%g,%g,%g)", d.rot_x_deg, d.rot_y_deg, d.translate_z_mm);
  return buf;
}

// Mean and population std of the finite entries.
std::pair<double, double> finite_stats(const std::vector<double>& v) {
  double sum = 0.0;
  int cnt = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      sum += x;
      ++cnt;
    }
  }
  if (cnt == 0) return {kNaN, kNaN};
  const double mean = sum / cnt;
  double sq = 0.0;
  for (double x : v) {
    if (std::isfinite(x)) sq += (x - mean) * (x - mean);
  }
  return {mean, std::sqrt(sq / cnt)};
}

}  // namespace

std::size_t StudyGrid::size() const {
  std::size_t s = 1;
  for (const auto& a : axes) s *= a.labels.size();
  return axes.empty() ? 0 : s;
}

std::size_t StudyGrid::offset(const std::vector<std::size_t>& index) const {
  if (index.size() != axes.size()) {
    throw Error(ErrorKind::out_of_range, "StudyGrid: index has " + std::to_string(index.size()) +
                                             " entries, grid has " +
                                             std::to_string(axes.size()) + " axes");
  }
  std::size_t off = 0;
  for (std::size_t k = 0; k < axes.size(); ++k) {
    if (index[k] >= axes[k].labels.size()) {
      throw Error(ErrorKind::out_of_range, "StudyGrid: index " + std::to_string(index[k]) +
                                               " out of range on axis '" + axes[k].name + "'");
    }
    off = off * axes[k].labels.size() + index[k];
  }
  return off;
}

DeviationStudy deviation_study(const ShapeSequence3D& ssm3d, const ScanPlane& plane,
                               const std::vector<PlanePerturbation>& perturbations,
                               Eigen::Index num_points, const RegressorConfig& cfg,
                               Execution ex) {
  const std::size_t n = ssm3d.num_frames();
  DeviationStudy out;
  out.perturbations = perturbations;
  out.grid.study = "deviation";
  GridAxis pert_axis{"perturbation", {}};
  for (const auto& d : perturbations) pert_axis.labels.push_back(perturbation_label(d));
  out.grid.axes = {pert_axis, frame_axis(n)};
  out.grid.values.assign(perturbations.size() * n, kNaN);
  out.mean_error.assign(perturbations.size(), kNaN);
  out.std_error.assign(perturbations.size(), kNaN);

  for (std::size_t k = 0; k < perturbations.size(); ++k) {
    const std::string label = pert_axis.labels[k];
    ContourSequence2D ssm2d;
    try {
      ssm2d = build_contour_sequence(ssm3d, perturb_plane(plane, perturbations[k]), num_points, ex);
    } catch (const Error& e) {
      out.grid.notes.push_back(label + ": " + e.what());
      continue;
    }
    const LoocvReport r = loocv(ssm3d, ssm2d, cfg, ex);
    for (std::size_t i = 0; i < n; ++i) {
      out.grid.at({k, i}) = r.per_frame_errors[i];
      if (!r.failures[i].empty()) {
        out.grid.notes.push_back(label + ", frame " + std::to_string(i) + ": " + r.failures[i]);
      }
    }
    const auto [mean, sd] = finite_stats(r.per_frame_errors);
    out.mean_error[k] = mean;
    out.std_error[k] = sd;
  }
  return out;
}

Frame2 Rigid2D::apply(const Frame2& f) const {
  const double a = angle_deg * std::numbers::pi / 180.0;
  Eigen::Matrix2d rot;
  rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  Frame2 out = f * rot.transpose();
  out.col(0).array() += tx;
  out.col(1).array() += ty;
  return out;
}

ContourSequence2D Rigid2D::apply(const ContourSequence2D& seq) const {
  std::vector<Frame2> frames;
  frames.reserve(seq.num_frames());
  for (const auto& f : seq.frames()) frames.push_back(apply(f));
  return ContourSequence2D(std::move(frames), seq.closed());
}

RegistrationStudy registration_study(const ShapeSequence3D& ssm3d,
                                     const ContourSequence2D& ssm2d, const Rigid2D& transform,
                                     const std::vector<RegressorConfig>& configs, Execution ex) {
  const std::size_t n = ssm3d.num_frames();
  const ContourSequence2D moved = transform.apply(ssm2d);
  RegistrationStudy out;
  out.grid.study = "registration";
  GridAxis reg_axis{"regressor", {}};
  for (const auto& c : configs) reg_axis.labels.push_back(config_label(c));
  out.grid.axes = {reg_axis, GridAxis{"predictor", {"original", "transformed"}}, frame_axis(n)};
  out.grid.values.assign(configs.size() * 2 * n, kNaN);

  for (std::size_t k = 0; k < configs.size(); ++k) {
    out.original.push_back(loocv(ssm3d, ssm2d, configs[k], ex));
    out.transformed.push_back(loocv(ssm3d, moved, configs[k], ex));
    for (std::size_t i = 0; i < n; ++i) {
      out.grid.at({k, 0, i}) = out.original.back().per_frame_errors[i];
      out.grid.at({k, 1, i}) = out.transformed.back().per_frame_errors[i];
    }
    for (const auto* r : {&out.original.back(), &out.transformed.back()}) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!r->failures[i].empty()) {
          out.grid.notes.push_back(reg_axis.labels[k] + ", frame " + std::to_string(i) + ": " +
                                   r->failures[i]);
        }
      }
    }
  }
  return out;
}

std::vector<std::size_t> BoundarySpec::resolve(std::size_t num_frames) const {
  std::set<std::size_t> s;
  if (kind == Kind::explicit_frames) {
    for (std::size_t f : frames) {
      if (f >= num_frames) {
        throw Error(ErrorKind::out_of_range, "boundary frame " + std::to_string(f) +
                                                 " outside 0.." +
                                                 std::to_string(num_frames == 0 ? 0 : num_frames - 1));
      }
      s.insert(f);
    }
    return {s.begin(), s.end()};
  }
  if (width < 0) throw Error(ErrorKind::spec, "boundary width must be non-negative");
  const auto w = std::min<std::size_t>(static_cast<std::size_t>(width), num_frames);
  for (std::size_t i = 0; i < w; ++i) {
    s.insert(i);
    s.insert(num_frames - 1 - i);
  }
  if (kind == Kind::full_cycle && num_frames > 0) {
    const std::size_t mid = num_frames / 2;
    s.insert(mid);
    if (mid > 0) s.insert(mid - 1);
    if (mid + 1 < num_frames) s.insert(mid + 1);
  }
  return {s.begin(), s.end()};
}

BoundarySummary boundary_analysis(const LoocvReport& report, const BoundarySpec& spec) {
  const std::size_t n = report.per_frame_errors.size();
  BoundarySummary out;
  out.boundary_frames = spec.resolve(n);
  std::vector<bool> is_boundary(n, false);
  for (std::size_t f : out.boundary_frames) is_boundary[f] = true;
  std::vector<double> b, in;
  for (std::size_t i = 0; i < n; ++i) {
    (is_boundary[i] ? b : in).push_back(report.per_frame_errors[i]);
  }
  out.boundary_mean = finite_stats(b).first;
  out.interior_mean = finite_stats(in).first;
  out.overall_mean = finite_stats(report.per_frame_errors).first;
  out.ratio = out.boundary_mean / out.interior_mean;
  return out;
}

}  // namespace shapeinst
