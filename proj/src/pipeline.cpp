#include "shapeinst/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shapeinst/mesh_io.hpp"

namespace shapeinst {

namespace fs = std::filesystem;
using io::Json;

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorKind::spec, "config: " + msg);
}

std::pair<int, int> components_from_json(const Json& j) {
  if (j.is_number_integer()) {
    const int m = j.get<int>();
    return {m, m};
  }
  if (j.is_array() && j.size() == 2) return {j[0].get<int>(), j[1].get<int>()};
  if (j.is_string()) return parse_component_range(j.get<std::string>());
  config_error("components must be an integer, [min, max] or \"min-max\"");
}

BoundarySpec boundary_from_json(const Json& j) {
  BoundarySpec b;
  const auto kind = j.value("kind", std::string("half_cycle"));
  if (kind == "half_cycle") {
    b.kind = BoundarySpec::Kind::half_cycle;
  } else if (kind == "full_cycle") {
    b.kind = BoundarySpec::Kind::full_cycle;
  } else if (kind == "explicit") {
    b.kind = BoundarySpec::Kind::explicit_frames;
  } else {
    config_error("boundary kind '" + kind + "' (expected half_cycle, full_cycle or explicit)");
  }
  b.width = j.value("width", 2);
  if (j.contains("frames")) b.frames = j["frames"].get<std::vector<std::size_t>>();
  return b;
}

Json boundary_to_json(const BoundarySpec& b) {
  const char* kind = b.kind == BoundarySpec::Kind::half_cycle   ? "half_cycle"
                     : b.kind == BoundarySpec::Kind::full_cycle ? "full_cycle"
                                                                : "explicit";
  return {{"kind", kind}, {"width", b.width}, {"frames", b.frames}};
}

std::string resolve_path(const fs::path& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || base.empty()) return p;
  return (base / p).string();
}

}  // namespace

std::pair<int, int> parse_component_range(const std::string& s) {
  const auto dash = s.find('-');
  try {
    std::size_t used = 0;
    if (dash == std::string::npos) {
      const int m = std::stoi(s, &used);
      if (used == s.size()) return {m, m};
    } else {
      const std::string lo = s.substr(0, dash), hi = s.substr(dash + 1);
      std::size_t used_hi = 0;
      const int a = std::stoi(lo, &used);
      const int b = std::stoi(hi, &used_hi);
      if (used == lo.size() && used_hi == hi.size()) return {a, b};
    }
  } catch (const std::exception&) {
  }
  config_error("components '" + s + "' is not an integer or min-max range");
}

void PipelineConfig::validate() const {
  if (version != 1) config_error("unsupported version " + std::to_string(version));
  if (numx < 3) config_error("numx must be at least 3");
  if (regressors.empty()) config_error("no regressor selected");
  if (components) {
    if (components->first < 1 || components->second < components->first) {
      config_error("component range must satisfy 1 <= min <= max");
    }
  }
  for (double r : ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) config_error("ratios must be positive");
  }
  if (selection != "per_subject" && selection != "per_frame") {
    config_error("selection must be per_subject or per_frame");
  }
  for (const auto& s : studies) {
    const auto& known = known_studies();
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      config_error("unknown study '" + s + "'");
    }
  }
  if (!(ridge_lambda >= 0.0)) config_error("ridge_lambda must be non-negative");
  if (sparsity_target < 0) config_error("sparsity_target must be non-negative");
  if (l1_penalty && !(*l1_penalty >= 0.0)) config_error("l1_penalty must be non-negative");
  if (mesh_manifest.empty()) phantom.validate();
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  try {
    if (!j.is_object()) config_error("expected a JSON object");
    if (!j.contains("version")) config_error("missing 'version'");
    c.version = j.at("version").get<int>();
    c.mesh_manifest = j.value("mesh_manifest", std::string());
    c.contour_manifest = j.value("contour_manifest", std::string());
    c.plane_file = j.value("plane", std::string());
    c.model_file = j.value("model", std::string());
    c.contour_file = j.value("contour", std::string());
    if (j.contains("phantom")) c.phantom = io::phantom_from_json(j["phantom"]);
    c.seed = j.value("seed", c.phantom.seed);
    if (j.contains("spca")) {
      const Json& s = j["spca"];
      c.ridge_lambda = s.value("ridge_lambda", c.ridge_lambda);
      c.sparsity_target = s.value("sparsity_target", c.sparsity_target);
      if (s.contains("l1_penalty")) c.l1_penalty = s["l1_penalty"].get<double>();
      c.spca_max_iter = s.value("max_iter", c.spca_max_iter);
      c.spca_tol = s.value("tol", c.spca_tol);
    }
    if (j.contains("plane_perturbation")) {
      c.plane_perturbation = io::perturbation_from_json(j["plane_perturbation"]);
    }
    c.numx = j.value("numx", c.numx);
    if (j.contains("regressor")) {
      c.regressors = {regressor_from_string(j["regressor"].get<std::string>())};
    }
    if (j.contains("regressors")) {
      c.regressors.clear();
      for (const auto& r : j["regressors"]) c.regressors.push_back(regressor_from_string(r.get<std::string>()));
    }
    if (j.contains("components")) c.components = components_from_json(j["components"]);
    if (j.contains("ratios")) {
      const Json& r = j["ratios"];
      c.ratios = r.is_array() ? r.get<std::vector<double>>() : std::vector<double>{r.get<double>()};
    }
    c.selection = j.value("selection", c.selection);
    if (j.contains("studies")) c.studies = j["studies"].get<std::vector<std::string>>();
    if (j.contains("perturbations")) {
      for (const auto& p : j["perturbations"]) c.perturbations.push_back(io::perturbation_from_json(p));
    }
    if (j.contains("registration")) {
      const Json& r = j["registration"];
      c.registration.angle_deg = r.value("angle_deg", c.registration.angle_deg);
      c.registration.tx = r.value("tx", c.registration.tx);
      c.registration.ty = r.value("ty", c.registration.ty);
    }
    if (j.contains("boundary")) c.boundary = boundary_from_json(j["boundary"]);
    c.out_dir = j.value("out", c.out_dir);
  } catch (const Json::exception& e) {
    config_error(e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::parse) config_error(e.what());
    throw;
  }
  return c;
}

Json to_json(const PipelineConfig& c) {
  Json j{{"version", c.version},
         {"phantom", io::to_json(c.phantom)},
         {"seed", c.seed},
         {"spca",
          {{"ridge_lambda", c.ridge_lambda},
           {"sparsity_target", c.sparsity_target},
           {"max_iter", c.spca_max_iter},
           {"tol", c.spca_tol}}},
         {"plane_perturbation", io::to_json(c.plane_perturbation)},
         {"numx", c.numx},
         {"selection", c.selection},
         {"studies", c.studies},
         {"registration",
          {{"angle_deg", c.registration.angle_deg}, {"tx", c.registration.tx}, {"ty", c.registration.ty}}},
         {"boundary", boundary_to_json(c.boundary)},
         {"out", c.out_dir}};
  if (!c.mesh_manifest.empty()) j["mesh_manifest"] = c.mesh_manifest;
  if (!c.contour_manifest.empty()) j["contour_manifest"] = c.contour_manifest;
  if (!c.plane_file.empty()) j["plane"] = c.plane_file;
  if (!c.model_file.empty()) j["model"] = c.model_file;
  if (!c.contour_file.empty()) j["contour"] = c.contour_file;
  if (c.l1_penalty) j["spca"]["l1_penalty"] = *c.l1_penalty;
  Json regs = Json::array();
  for (auto k : c.regressors) regs.push_back(to_string(k));
  j["regressors"] = std::move(regs);
  if (c.components) j["components"] = {c.components->first, c.components->second};
  if (!c.ratios.empty()) j["ratios"] = c.ratios;
  if (!c.perturbations.empty()) {
    Json p = Json::array();
    for (const auto& d : c.perturbations) p.push_back(io::to_json(d));
    j["perturbations"] = std::move(p);
  }
  return j;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error& e) {
    config_error(e.what());
  }
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
  PipelineConfig c = config_from_json(j);
  const fs::path base = path.parent_path();
  for (std::string* p : {&c.mesh_manifest, &c.contour_manifest, &c.plane_file, &c.model_file,
                         &c.contour_file}) {
    *p = resolve_path(base, *p);
  }
  return c;
}

SearchSpace search_space(const PipelineConfig& c, RegressorKind kind) {
  SearchSpace s = default_search(kind);
  if (c.components) {
    s.min_components = c.components->first;
    s.max_components = c.components->second;
  }
  if (kind == RegressorKind::kplsr && !c.ratios.empty()) s.ratios = c.ratios;
  return s;
}

SpcaConfig spca_config(const PipelineConfig& c, Eigen::Index num_vertices) {
  SpcaConfig s;
  s.k = 1;
  s.ridge_lambda = c.ridge_lambda;
  s.max_iter = c.spca_max_iter;
  s.tol = c.spca_tol;
  if (c.l1_penalty) {
    s.sparsity = {L1Penalty{*c.l1_penalty}};
  } else {
    const Eigen::Index target = c.sparsity_target > 0 ? c.sparsity_target
                                                      : default_sparsity_target(num_vertices);
    s.sparsity = {NonzeroTarget{target}};
  }
  return s;
}

ShapeSequence3D load_shapes(const PipelineConfig& c) {
  if (!c.mesh_manifest.empty()) return io::read_mesh_sequence(c.mesh_manifest);
  PhantomSpec spec = c.phantom;
  spec.seed = c.seed;
  return generate(spec);
}

PlaneReport optimal_plane(const ShapeSequence3D& ssm3d, const SpcaConfig& cfg) {
  const DesignMatrix dm = flatten(ssm3d);
  const auto [y_norm, stats] = center_normalize(dm, NormalizeMode::center_and_normalize);
  PlaneReport r;
  r.loadings = spca(y_norm.values, cfg);
  r.contributions = vertex_contributions(r.loadings, 0);
  r.mean_shape = unflatten_row(stats.column_means, 3);
  std::vector<Eigen::Vector3d> pts;
  std::vector<double> w;
  for (Eigen::Index v : r.contributions.selected) {
    pts.push_back(r.mean_shape.row(v).transpose());
    w.push_back(r.contributions.contributions(v));
  }
  r.fit = fit_weighted_plane(pts, w);
  return r;
}

ScanPlane resolve_plane(const PipelineConfig& c, const ShapeSequence3D& ssm3d) {
  ScanPlane p;
  if (!c.plane_file.empty()) {
    // Accepts the plane.json written by the plane command or a bare plane object.
    const Json j = io::parse_json(io::read_file(c.plane_file), c.plane_file);
    p = io::plane_from_json(j.contains("plane") ? j["plane"] : j);
  } else {
    p = optimal_plane(ssm3d, spca_config(c, ssm3d.num_vertices())).fit.plane;
  }
  return perturb_plane(p, c.plane_perturbation);
}

ContourSequence2D resolve_contours(const PipelineConfig& c, const ShapeSequence3D& ssm3d,
                                   Execution ex) {
  if (!c.contour_manifest.empty()) return io::read_contour_sequence(c.contour_manifest);
  return build_contour_sequence(ssm3d, resolve_plane(c, ssm3d), c.numx, ex);
}

StudyOutputs run_studies(const PipelineConfig& c, Execution ex) {
  c.validate();
  StudyOutputs out;
  if (c.studies.empty()) return out;
  auto wants = [&](const char* name) {
    return std::find(c.studies.begin(), c.studies.end(), name) != c.studies.end();
  };

  const ShapeSequence3D ssm3d = load_shapes(c);
  const ScanPlane plane = resolve_plane(c, ssm3d);
  const ContourSequence2D ssm2d = c.contour_manifest.empty()
                                      ? build_contour_sequence(ssm3d, plane, c.numx, ex)
                                      : io::read_contour_sequence(c.contour_manifest);
  out["plane.json"] = io::dump({{"version", io::kFormatVersion}, {"plane", io::to_json(plane)}});

  // Per-subject choice feeds every study; per-frame mode changes only the
  // LOOCV report itself.
  std::map<RegressorKind, Selection> chosen;
  for (auto kind : c.regressors) {
    chosen[kind] = select_config(ssm3d, ssm2d, search_space(c, kind), ex);
  }
  auto selection_json = [&] {
    Json j = Json::object();
    for (const auto& [kind, sel] : chosen) {
      j[to_string(kind)] = {{"config", io::to_json(sel.best)},
                            {"mean_error", sel.best_mean_error}};
    }
    return j;
  };

  std::map<RegressorKind, LoocvReport> reports;
  if (wants("loocv") || wants("boundary")) {
    for (auto kind : c.regressors) {
      reports[kind] = c.selection == "per_frame"
                          ? loocv_nested(ssm3d, ssm2d, search_space(c, kind), ex)
                          : loocv(ssm3d, ssm2d, chosen[kind].best, ex);
    }
  }
  auto report_of = [&](RegressorKind k) -> const LoocvReport* {
    const auto it = reports.find(k);
    return it == reports.end() ? nullptr : &it->second;
  };

  if (wants("loocv")) {
    Json j{{"version", io::kFormatVersion}, {"selection_mode", c.selection},
           {"selection", selection_json()}, {"reports", Json::object()}};
    for (const auto& [kind, r] : reports) j["reports"][to_string(kind)] = io::to_json(r);
    out["loocv.json"] = io::dump(j);
    const auto& variations = reports.begin()->second.shape_variations;
    out["loocv.csv"] = io::frame_csv(report_of(RegressorKind::plsr),
                                     report_of(RegressorKind::kplsr), variations);
  }

  if (wants("components")) {
    Json j{{"version", io::kFormatVersion}, {"sweeps", Json::object()}};
    for (auto kind : c.regressors) {
      const SearchSpace s = search_space(c, kind);
      const auto sweep = sweep_components(ssm3d, ssm2d, kind, s.min_components, s.max_components,
                                          chosen[kind].best.ratio, ex);
      j["sweeps"][to_string(kind)] = {{"ratio", chosen[kind].best.ratio},
                                      {"grid", io::to_json(sweep.grid)},
                                      {"frame_mean", io::vector_to_json(sweep.frame_mean)},
                                      {"frame_std", io::vector_to_json(sweep.frame_std)},
                                      {"shape_variations", io::vector_to_json(sweep.shape_variations)}};
      out[std::string("components_") + to_string(kind) + ".csv"] = io::grid_csv(sweep.grid);
    }
    out["components.json"] = io::dump(j);
  }

  if (wants("deviation")) {
    const auto perturbations = c.perturbations.empty() ? deviation_preset() : c.perturbations;
    Json j{{"version", io::kFormatVersion}, {"studies", Json::object()}};
    for (auto kind : c.regressors) {
      const auto dev = deviation_study(ssm3d, plane, perturbations, c.numx, chosen[kind].best, ex);
      Json perts = Json::array();
      for (const auto& d : dev.perturbations) perts.push_back(io::to_json(d));
      j["studies"][to_string(kind)] = {{"config", io::to_json(chosen[kind].best)},
                                       {"perturbations", std::move(perts)},
                                       {"grid", io::to_json(dev.grid)},
                                       {"mean_error", io::vector_to_json(dev.mean_error)},
                                       {"std_error", io::vector_to_json(dev.std_error)}};
      out[std::string("deviation_") + to_string(kind) + ".csv"] = io::grid_csv(dev.grid);
    }
    out["deviation.json"] = io::dump(j);
  }

  if (wants("registration")) {
    std::vector<RegressorConfig> configs;
    for (auto kind : c.regressors) configs.push_back(chosen[kind].best);
    const auto reg = registration_study(ssm3d, ssm2d, c.registration, configs, ex);
    Json orig = Json::array(), moved = Json::array();
    for (const auto& r : reg.original) orig.push_back(io::to_json(r));
    for (const auto& r : reg.transformed) moved.push_back(io::to_json(r));
    out["registration.json"] = io::dump({{"version", io::kFormatVersion},
                                         {"transform",
                                          {{"angle_deg", c.registration.angle_deg},
                                           {"tx", c.registration.tx},
                                           {"ty", c.registration.ty}}},
                                         {"grid", io::to_json(reg.grid)},
                                         {"original", std::move(orig)},
                                         {"transformed", std::move(moved)}});
    out["registration.csv"] = io::grid_csv(reg.grid);
  }

  if (wants("boundary")) {
    Json j{{"version", io::kFormatVersion}, {"summaries", Json::object()}};
    for (const auto& [kind, r] : reports) {
      j["summaries"][to_string(kind)] = io::to_json(boundary_analysis(r, c.boundary));
    }
    out["boundary.json"] = io::dump(j);
  }
  return out;
}

}  // namespace shapeinst
