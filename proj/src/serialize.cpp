#include "shapeinst/serialize.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "shapeinst/mesh_io.hpp"

namespace shapeinst::io {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Json vec3(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::parse, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json row_to_json(const Eigen::RowVectorXd& r) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < r.size(); ++i) a.push_back(number(r(i)));
  return a;
}

Eigen::RowVectorXd row_from_json(const Json& j) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) r(static_cast<Eigen::Index>(i)) = number_from(j[i]);
  return r;
}

Json stats_to_json(const NormalizationStats& s) {
  return {{"mode", s.mode == NormalizeMode::center_only ? "center_only" : "center_and_normalize"},
          {"column_means", row_to_json(s.column_means)},
          {"column_norms", row_to_json(s.column_norms)}};
}

NormalizationStats stats_from_json(const Json& j) {
  NormalizationStats s;
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "center_only") {
    s.mode = NormalizeMode::center_only;
  } else if (mode == "center_and_normalize") {
    s.mode = NormalizeMode::center_and_normalize;
  } else {
    throw Error(ErrorKind::parse, "unknown normalization mode '" + mode + "'");
  }
  s.column_means = row_from_json(j.at("column_means"));
  s.column_norms = row_from_json(j.at("column_norms"));
  return s;
}

Json pls_to_json(const PlsModel& m) {
  return {{"n_components", m.n_components},
          {"x_stats", stats_to_json(m.x_stats)},
          {"y_stats", stats_to_json(m.y_stats)},
          {"weights", matrix_to_json(m.weights)},
          {"scores", matrix_to_json(m.scores)},
          {"x_loadings", matrix_to_json(m.x_loadings)},
          {"coefficients", matrix_to_json(m.coefficients)},
          {"score_response", matrix_to_json(m.score_response)}};
}

PlsModel pls_from_json(const Json& j) {
  PlsModel m;
  m.n_components = j.at("n_components").get<int>();
  m.x_stats = stats_from_json(j.at("x_stats"));
  m.y_stats = stats_from_json(j.at("y_stats"));
  m.weights = matrix_from_json(j.at("weights"));
  m.scores = matrix_from_json(j.at("scores"));
  m.x_loadings = matrix_from_json(j.at("x_loadings"));
  m.coefficients = matrix_from_json(j.at("coefficients"));
  m.score_response = matrix_from_json(j.at("score_response"));
  if (m.weights.cols() != m.n_components || m.scores.cols() != m.n_components ||
      m.score_response.rows() != m.n_components ||
      m.x_stats.column_means.size() != m.weights.rows() ||
      m.y_stats.column_means.size() != m.coefficients.cols()) {
    throw Error(ErrorKind::structural, "model: inconsistent matrix shapes");
  }
  return m;
}

template <typename F>
auto guarded(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::parse, what + ": " + e.what());
  }
}

}  // namespace

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(number(m(r, c)));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const Json& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw Error(ErrorKind::parse, "matrix: data length does not match rows x cols");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number_from(data[k++]);
  }
  return m;
}

Json vector_to_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<double> doubles_from_json(const Json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(number_from(x));
  return v;
}

Json to_json(const ScanPlane& p) {
  return {{"origin", vec3(p.origin)},
          {"axis_x", vec3(p.axis_x)},
          {"axis_y", vec3(p.axis_y)},
          {"normal", vec3(p.normal)}};
}

ScanPlane plane_from_json(const Json& j) {
  return guarded("plane", [&] {
    ScanPlane p;
    p.origin = vec3_from(j.at("origin"));
    if (j.contains("axis_x")) {
      p.axis_x = vec3_from(j.at("axis_x"));
      p.axis_y = vec3_from(j.at("axis_y"));
      p.normal = vec3_from(j.at("normal"));
      if (p.frame_error() > 1e-9) {
        throw Error(ErrorKind::degenerate_geometry, "plane: axes are not a right-handed orthonormal frame");
      }
    } else {
      p = ScanPlane::from_normal(p.origin, vec3_from(j.at("normal")));
    }
    return p;
  });
}

Json to_json(const PlaneFit& f) {
  return {{"plane", to_json(f.plane)},
          {"weighted_sq_residual", f.weighted_sq_residual},
          {"weighted_abs_residual", f.weighted_abs_residual}};
}

Json to_json(const PlanePerturbation& d) {
  return {{"rot_x_deg", d.rot_x_deg}, {"rot_y_deg", d.rot_y_deg}, {"translate_z_mm", d.translate_z_mm}};
}

PlanePerturbation perturbation_from_json(const Json& j) {
  return guarded("perturbation", [&] {
    PlanePerturbation d;
    if (j.is_array()) {
      if (j.size() != 3) throw Error(ErrorKind::parse, "perturbation: expected [rx, ry, tz]");
      d.rot_x_deg = j[0].get<double>();
      d.rot_y_deg = j[1].get<double>();
      d.translate_z_mm = j[2].get<double>();
      return d;
    }
    d.rot_x_deg = j.value("rot_x_deg", 0.0);
    d.rot_y_deg = j.value("rot_y_deg", 0.0);
    d.translate_z_mm = j.value("translate_z_mm", 0.0);
    return d;
  });
}

Json to_json(const SparseLoadings& sl) {
  Json support = Json::array();
  for (const auto& s : sl.support) support.push_back(s);
  Json trace = Json::array();
  for (const auto& t : sl.objective_trace) trace.push_back(vector_to_json(t));
  return {{"loadings", matrix_to_json(sl.loadings)},
          {"support", std::move(support)},
          {"status", sl.status == SpcaStatus::converged ? "converged" : "max_iter_reached"},
          {"iterations", sl.iterations},
          {"objective_trace", std::move(trace)}};
}

Json to_json(const VertexContribution& vc) {
  std::vector<double> c(vc.contributions.data(), vc.contributions.data() + vc.contributions.size());
  return {{"contributions", vector_to_json(c)}, {"selected", vc.selected}};
}

Json to_json(const RegressorConfig& c) {
  Json j{{"kind", to_string(c.kind)}, {"components", c.components}};
  if (c.kind == RegressorKind::kplsr) j["ratio"] = c.ratio;
  return j;
}

RegressorConfig regressor_config_from_json(const Json& j) {
  return guarded("regressor", [&] {
    RegressorConfig c;
    c.kind = regressor_from_string(j.at("kind").get<std::string>());
    c.components = j.at("components").get<int>();
    c.ratio = j.value("ratio", 1.0);
    return c;
  });
}

Json to_json(const ModelFile& m) {
  Json model;
  if (m.model.kind() == RegressorKind::kplsr) {
    const auto& k = m.model.kplsr();
    model = {{"training_rows", matrix_to_json(k.training_rows)},
             {"kernel", {{"ratio", k.kernel.ratio}, {"width", k.kernel.width}}},
             {"kernel_column_means", row_to_json(k.kernel_column_means)},
             {"inner", pls_to_json(k.inner)}};
  } else {
    model = pls_to_json(m.model.pls());
  }
  Json tris = Json::array();
  for (const auto& t : m.triangles) tris.push_back({t[0], t[1], t[2]});
  return {{"version", kFormatVersion},
          {"config", to_json(m.config)},
          {"contour_points", m.contour_points},
          {"closed", m.closed},
          {"triangles", std::move(tris)},
          {"model", std::move(model)}};
}

ModelFile model_from_json(const Json& j) {
  return guarded("model", [&] {
    const int version = j.at("version").get<int>();
    if (version != kFormatVersion) {
      throw Error(ErrorKind::parse, "model: unsupported version " + std::to_string(version));
    }
    ModelFile m;
    m.config = regressor_config_from_json(j.at("config"));
    m.contour_points = j.at("contour_points").get<Eigen::Index>();
    m.closed = j.at("closed").get<bool>();
    for (const auto& t : j.at("triangles")) m.triangles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
    const Json& model = j.at("model");
    if (m.config.kind == RegressorKind::kplsr) {
      KplsrModel k;
      k.training_rows = matrix_from_json(model.at("training_rows"));
      k.kernel.ratio = model.at("kernel").at("ratio").get<double>();
      k.kernel.width = model.at("kernel").at("width").get<double>();
      k.kernel_column_means = row_from_json(model.at("kernel_column_means"));
      k.inner = pls_from_json(model.at("inner"));
      m.model = RegressionModel(std::move(k));
    } else {
      m.model = RegressionModel(pls_from_json(model));
    }
    if (m.model.num_predictors() != 2 * m.contour_points) {
      throw Error(ErrorKind::structural, "model: predictor count does not match contour_points");
    }
    if (m.model.num_responses() % 3 != 0) {
      throw Error(ErrorKind::structural, "model: response count is not a multiple of 3");
    }
    const auto nv = m.model.num_responses() / 3;
    for (const auto& t : m.triangles) {
      for (int v : t) {
        if (v < 0 || v >= nv) throw Error(ErrorKind::structural, "model: triangle index out of range");
      }
    }
    return m;
  });
}

void save_model(const std::filesystem::path& path, const ModelFile& m) {
  write_file_atomic(path, dump(to_json(m)));
}

ModelFile load_model(const std::filesystem::path& path) {
  return model_from_json(parse_json(read_file(path), path.string()));
}

Json to_json(const LoocvReport& r) {
  Json configs = Json::array();
  for (const auto& c : r.fold_configs) configs.push_back(to_json(c));
  return {{"config", to_json(r.config)},
          {"per_frame_errors", vector_to_json(r.per_frame_errors)},
          {"mean_error", number(r.mean_error())},
          {"failures", r.failures},
          {"fold_configs", std::move(configs)},
          {"shape_variations", vector_to_json(r.shape_variations)},
          {"one_sided_variations", vector_to_json(r.one_sided_variations)},
          {"boundary_frames", r.boundary_frames}};
}

Json to_json(const StudyGrid& g) {
  Json axes = Json::array();
  for (const auto& a : g.axes) axes.push_back({{"name", a.name}, {"labels", a.labels}});
  return {{"study", g.study},
          {"axes", std::move(axes)},
          {"values", vector_to_json(g.values)},
          {"notes", g.notes}};
}

Json to_json(const BoundarySummary& b) {
  return {{"boundary_frames", b.boundary_frames},
          {"boundary_mean", number(b.boundary_mean)},
          {"interior_mean", number(b.interior_mean)},
          {"overall_mean", number(b.overall_mean)},
          {"ratio", number(b.ratio)}};
}

namespace {

std::string csv_cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace

std::string grid_csv(const StudyGrid& g) {
  std::string out;
  for (const auto& a : g.axes) out += a.name + ",";
  out += "value\n";
  const std::size_t total = g.size();
  std::vector<std::size_t> idx(g.axes.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    for (std::size_t a = 0; a < g.axes.size(); ++a) {
      const std::string& label = g.axes[a].labels[idx[a]];
      // Labels may contain commas (perturbation triples).
      out += label.find(',') == std::string::npos ? label : "\"" + label + "\"";
      out += ',';
    }
    out += csv_cell(g.values[k]) + "\n";
    for (std::size_t a = g.axes.size(); a-- > 0;) {
      if (++idx[a] < g.axes[a].labels.size()) break;
      idx[a] = 0;
    }
  }
  return out;
}

std::string frame_csv(const LoocvReport* plsr, const LoocvReport* kplsr,
                      const std::vector<double>& shape_variations) {
  std::string out = "frame,error_plsr,error_kplsr,shape_variation\n";
  for (std::size_t t = 0; t < shape_variations.size(); ++t) {
    out += std::to_string(t) + ",";
    out += (plsr ? csv_cell(plsr->per_frame_errors.at(t)) : std::string()) + ",";
    out += (kplsr ? csv_cell(kplsr->per_frame_errors.at(t)) : std::string()) + ",";
    out += csv_cell(shape_variations[t]) + "\n";
  }
  return out;
}

Json to_json(const PhantomSpec& s) {
  return {{"base", to_string(s.base)},
          {"semi_axes", vec3(s.semi_axes)},
          {"n_frames", s.n_frames},
          {"n_vertices", s.n_vertices},
          {"deformation", to_string(s.deformation)},
          {"amplitude", s.amplitude},
          {"phase", s.phase},
          {"cycle", to_string(s.cycle)},
          {"seed", s.seed},
          {"bump_scale", s.bump_scale},
          {"band_normal", vec3(s.band_normal)},
          {"band_width", s.band_width},
          {"cap_start", s.cap_start},
          {"motion_floor", s.motion_floor}};
}

PhantomSpec phantom_from_json(const Json& j, PhantomSpec s) {
  return guarded("phantom", [&] {
    if (!j.is_object()) throw Error(ErrorKind::spec, "phantom: expected an object");
    if (j.contains("base")) s.base = base_shape_from_string(j["base"].get<std::string>());
    if (j.contains("semi_axes")) s.semi_axes = vec3_from(j["semi_axes"]);
    if (j.contains("n_frames")) s.n_frames = j["n_frames"].get<int>();
    if (j.contains("n_vertices")) s.n_vertices = j["n_vertices"].get<int>();
    if (j.contains("deformation")) s.deformation = deformation_from_string(j["deformation"].get<std::string>());
    if (j.contains("amplitude")) s.amplitude = j["amplitude"].get<double>();
    if (j.contains("phase")) s.phase = j["phase"].get<double>();
    if (j.contains("cycle")) s.cycle = cycle_from_string(j["cycle"].get<std::string>());
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("bump_scale")) s.bump_scale = j["bump_scale"].get<double>();
    if (j.contains("band_normal")) s.band_normal = vec3_from(j["band_normal"]);
    if (j.contains("band_width")) s.band_width = j["band_width"].get<double>();
    if (j.contains("cap_start")) s.cap_start = j["cap_start"].get<double>();
    if (j.contains("motion_floor")) s.motion_floor = j["motion_floor"].get<double>();
    return s;
  });
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::parse, source + ": " + e.what());
  }
}

}  // namespace shapeinst::io
