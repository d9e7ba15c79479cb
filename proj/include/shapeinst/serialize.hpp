#pragma once

// JSON encodings for planes, SPCA results, fitted models and study reports.
// Matrices are {"rows", "cols", "data"} with data in row-major order; NaN
// cells are written as null and read back as NaN.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapeinst/phantom.hpp"
#include "shapeinst/regress.hpp"
#include "shapeinst/scanplane.hpp"
#include "shapeinst/spca.hpp"
#include "shapeinst/validate.hpp"

namespace shapeinst::io {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const std::vector<double>& v);
std::vector<double> doubles_from_json(const Json& j);

Json to_json(const ScanPlane& p);
ScanPlane plane_from_json(const Json& j);
Json to_json(const PlaneFit& f);
Json to_json(const PlanePerturbation& d);
PlanePerturbation perturbation_from_json(const Json& j);

Json to_json(const SparseLoadings& sl);
Json to_json(const VertexContribution& vc);

Json to_json(const RegressorConfig& c);
RegressorConfig regressor_config_from_json(const Json& j);

/// Everything `instantiate` needs: the model plus the shape metadata to turn
/// a prediction back into a mesh.
struct ModelFile {
  RegressorConfig config;
  RegressionModel model;
  Eigen::Index contour_points = 0;
  bool closed = true;
  std::vector<Triangle> triangles;
};

Json to_json(const ModelFile& m);
ModelFile model_from_json(const Json& j);
void save_model(const std::filesystem::path& path, const ModelFile& m);
ModelFile load_model(const std::filesystem::path& path);

Json to_json(const LoocvReport& r);
Json to_json(const StudyGrid& g);
Json to_json(const BoundarySummary& b);

/// Long-format CSV: one column per axis (labels), then `value`.
std::string grid_csv(const StudyGrid& g);

/// Plot-ready per-frame table: frame,error_plsr,error_kplsr,shape_variation.
/// Either report may be null; missing values are empty cells.
std::string frame_csv(const LoocvReport* plsr, const LoocvReport* kplsr,
                      const std::vector<double>& shape_variations);

Json to_json(const PhantomSpec& s);
/// Fields absent from `j` keep their value in `base`.
PhantomSpec phantom_from_json(const Json& j, PhantomSpec base = {});

/// Pretty-printed with sorted keys, so equal values give equal bytes.
std::string dump(const Json& j);
Json parse_json(const std::string& text, const std::string& source);

}  // namespace shapeinst::io
