#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shapeinst/phantom.hpp"
#include "shapeinst/regress.hpp"
#include "shapeinst/scanplane.hpp"
#include "shapeinst/serialize.hpp"
#include "shapeinst/spca.hpp"
#include "shapeinst/validate.hpp"

namespace shapeinst {

/// One JSON document drives every command. Empty paths mean "not given";
/// without a mesh manifest the phantom section is generated instead.
struct PipelineConfig {
  int version = 1;
  std::string mesh_manifest;
  std::string contour_manifest;
  std::string plane_file;
  std::string model_file;
  std::string contour_file;
  PhantomSpec phantom;
  std::uint64_t seed = 0;  // overrides phantom.seed

  double ridge_lambda = 1e-4;
  // Non-zero loadings kept in the first sparse mode; 0 selects 5% of the vertices.
  Eigen::Index sparsity_target = 0;
  std::optional<double> l1_penalty;  // takes precedence over the target
  int spca_max_iter = 200;
  double spca_tol = 1e-6;
  PlanePerturbation plane_perturbation;

  Eigen::Index numx = 64;
  std::vector<RegressorKind> regressors{RegressorKind::plsr, RegressorKind::kplsr};
  // Unset means the per-kind default search range.
  std::optional<std::pair<int, int>> components;
  std::vector<double> ratios;  // empty: default grid
  std::string selection = "per_subject";  // or "per_frame"

  std::vector<std::string> studies;
  std::vector<PlanePerturbation> perturbations;  // empty: the 13-plane preset
  Rigid2D registration{30.0, 40.0, -25.0};
  BoundarySpec boundary;

  std::string out_dir = "out";

  /// Throws Error(spec) on unusable values.
  void validate() const;
};

inline const std::vector<std::string>& known_studies() {
  static const std::vector<std::string> names{"loocv", "components", "deviation",
                                              "registration", "boundary"};
  return names;
}

/// "4" or "1-18".
std::pair<int, int> parse_component_range(const std::string& s);

PipelineConfig config_from_json(const io::Json& j);
io::Json to_json(const PipelineConfig& c);
PipelineConfig load_config(const std::filesystem::path& path);

SearchSpace search_space(const PipelineConfig& c, RegressorKind kind);
SpcaConfig spca_config(const PipelineConfig& c, Eigen::Index num_vertices);

ShapeSequence3D load_shapes(const PipelineConfig& c);

struct PlaneReport {
  PlaneFit fit;
  SparseLoadings loadings;
  VertexContribution contributions;
  Frame3 mean_shape;
};

/// flatten, center and normalize, SPCA, informative vertices of the first
/// sparse mode, then the contribution-weighted plane through their positions
/// on the mean shape.
PlaneReport optimal_plane(const ShapeSequence3D& ssm3d, const SpcaConfig& cfg);

/// Plane from `plane_file` when given, otherwise the optimal plane; the
/// configured perturbation is applied either way.
ScanPlane resolve_plane(const PipelineConfig& c, const ShapeSequence3D& ssm3d);

/// Contours from `contour_manifest` when given, otherwise sliced.
ContourSequence2D resolve_contours(const PipelineConfig& c, const ShapeSequence3D& ssm3d,
                                   Execution ex = Execution::parallel);

/// File name -> content for every selected study. Contents carry no timing
/// or host information, so equal configs give equal bytes.
using StudyOutputs = std::map<std::string, std::string>;
StudyOutputs run_studies(const PipelineConfig& c, Execution ex = Execution::parallel);

}  // namespace shapeinst
