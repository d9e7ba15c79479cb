#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "shapeinst/kernels.hpp"
#include "shapeinst/regress.hpp"
#include "shapeinst/scanplane.hpp"
#include "shapeinst/ssm.hpp"

namespace shapeinst {

/// Leave-one-out results for one regressor configuration.
struct LoocvReport {
  RegressorConfig config;
  // Mean vertex distance (mm) per held-out frame; NaN where the fold failed.
  std::vector<double> per_frame_errors;
  std::vector<std::string> failures;  // empty string for successful folds
  // Configuration actually used per fold (differs only in nested mode).
  std::vector<RegressorConfig> fold_configs;
  // Frame t-1 to t+1 distance; NaN at the two end frames.
  std::vector<double> shape_variations;
  // Distance to the single neighbour, filled only at the end frames.
  std::vector<double> one_sided_variations;
  std::vector<std::size_t> boundary_frames;  // frames lacking a neighbour on one side

  double mean_error() const;
  std::size_t failed_folds() const;
};

LoocvReport loocv(const ShapeSequence3D& ssm3d, const ContourSequence2D& ssm2d,
                  const RegressorConfig& cfg, Execution ex = Execution::parallel);

/// Hyperparameter search space for one regressor kind.
struct SearchSpace {
  RegressorKind kind = RegressorKind::kplsr;
  int min_components = 1;
  int max_components = 1;
  std::vector<double> ratios{1.0};  // ignored for PLSR
};

SearchSpace default_search(RegressorKind kind);
std::vector<double> default_ratio_grid();

struct Selection {
  RegressorConfig best;
  double best_mean_error = 0.0;
};

/// Per-subject choice: the configuration with the lowest mean LOOCV error
/// over all frames. Ties keep the smaller component count, then earlier ratio.
Selection select_config(const ShapeSequence3D& ssm3d, const ContourSequence2D& ssm2d,
                        const SearchSpace& space, Execution ex = Execution::parallel);

/// Per-frame choice: every outer fold picks its configuration by an inner
/// leave-one-out over its own training frames only.
LoocvReport loocv_nested(const ShapeSequence3D& ssm3d, const ContourSequence2D& ssm2d,
                         const SearchSpace& space, Execution ex = Execution::parallel);

struct GridAxis {
  std::string name;
  std::vector<std::string> labels;
};

/// Dense result tensor over the product of its axes, row-major; NaN marks a
/// missing cell whose reason is listed in `notes`.
struct StudyGrid {
  std::string study;
  std::vector<GridAxis> axes;
  std::vector<double> values;
  std::vector<std::string> notes;

  std::size_t size() const;
  std::size_t offset(const std::vector<std::size_t>& index) const;
  double at(const std::vector<std::size_t>& index) const { return values.at(offset(index)); }
  double& at(const std::vector<std::size_t>& index) { return values.at(offset(index)); }
};

struct ComponentSweep {
  StudyGrid grid;  // axes: components x frame
  std::vector<double> frame_mean;  // across components, per frame
  std::vector<double> frame_std;   // population std across components
  std::vector<double> shape_variations;
};

ComponentSweep sweep_components(const ShapeSequence3D& ssm3d, const ContourSequence2D& ssm2d,
                                RegressorKind kind, int min_components, int max_components,
                                double ratio = 1.0, Execution ex = Execution::parallel);

struct DeviationStudy {
  StudyGrid grid;  // axes: perturbation x frame
  std::vector<PlanePerturbation> perturbations;
  std::vector<double> mean_error;  // per perturbation, NaN if missing
  std::vector<double> std_error;
};

DeviationStudy deviation_study(const ShapeSequence3D& ssm3d, const ScanPlane& plane,
                               const std::vector<PlanePerturbation>& perturbations,
                               Eigen::Index num_points, const RegressorConfig& cfg,
                               Execution ex = Execution::parallel);

/// Rotation (degrees, about the in-plane origin) followed by translation (mm),
/// applied to every 2D vertex.
struct Rigid2D {
  double angle_deg = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Frame2 apply(const Frame2& f) const;
  ContourSequence2D apply(const ContourSequence2D& seq) const;
};

struct RegistrationStudy {
  StudyGrid grid;  // axes: regressor x predictor {original, transformed} x frame
  std::vector<LoocvReport> original;
  std::vector<LoocvReport> transformed;
};

RegistrationStudy registration_study(const ShapeSequence3D& ssm3d,
                                     const ContourSequence2D& ssm2d, const Rigid2D& transform,
                                     const std::vector<RegressorConfig>& configs,
                                     Execution ex = Execution::parallel);

struct BoundarySpec {
  enum class Kind { half_cycle, full_cycle, explicit_frames } kind = Kind::half_cycle;
  // Frames at each end (and either side of mid-cycle for full cycles).
  int width = 2;
  std::vector<std::size_t> frames;  // explicit_frames only

  std::vector<std::size_t> resolve(std::size_t num_frames) const;
};

struct BoundarySummary {
  std::vector<std::size_t> boundary_frames;
  double boundary_mean = 0.0;  // NaN when the set is empty
  double interior_mean = 0.0;  // NaN when every frame is boundary
  double overall_mean = 0.0;
  double ratio = 0.0;          // boundary_mean / interior_mean
};

BoundarySummary boundary_analysis(const LoocvReport& report, const BoundarySpec& spec);

std::string config_label(const RegressorConfig& cfg);

}  // namespace shapeinst
